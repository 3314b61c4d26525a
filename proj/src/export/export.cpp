#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "geobim/error.hpp"
#include "geobim/export.hpp"

namespace geobim {

namespace {

std::string coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", round_to(v, 3));
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_to(v, decimals));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string ring_text(const std::vector<Vec2>& ring, const Eigen::Affine2d& xf) {
  std::string out = "(";
  for (std::size_t i = 0; i <= ring.size(); ++i) {
    const Vec2 p = xf * ring[i % ring.size()];
    if (i) out += ", ";
    out += coord(p.x()) + " " + coord(p.y());
  }
  return out + ")";
}

int decimals_for(const std::string& unit) { return unit == "%" ? 1 : 3; }

Json measurement_json(const Measurement& m) {
  Json j;
  j["name"] = m.name;
  j["value"] = round_to(m.value, decimals_for(m.unit));
  j["unit"] = m.unit;
  return j;
}

}  // namespace

std::string_view to_string(Frame frame) { return frame == Frame::ModelLocal ? "model-local" : "site-projected"; }

Frame parse_frame(std::string_view text) {
  if (text == "local" || text == "model-local") return Frame::ModelLocal;
  if (text == "projected" || text == "site-projected") return Frame::SiteProjected;
  throw Error(ErrorCode::InvalidParams, "frame must be model-local or site-projected", std::string(text));
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(value * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

Eigen::Affine2d site_projection(const GeoRef& georef) {
  if (!georef.site_origin || georef.logeoref_level < LoGeoRef::L30)
    throw Error(ErrorCode::NoGeoreference, "site-projected frame needs a georeferenced site origin");
  double theta = 0.0;
  if (georef.true_north) theta = M_PI / 2 - std::atan2(georef.true_north->y(), georef.true_north->x());
  Eigen::Affine2d xf = Eigen::Affine2d::Identity();
  xf.translate(georef.site_origin->head<2>());
  xf.rotate(theta);
  return xf;
}

std::vector<WktRecord> to_wkt(const FootprintSet& footprints, const GeoRef& georef, Frame frame,
                              std::optional<double> building_top) {
  const Eigen::Affine2d xf = frame == Frame::SiteProjected ? site_projection(georef) : Eigen::Affine2d::Identity();
  const double dz = frame == Frame::SiteProjected ? georef.site_origin->z() : 0.0;
  std::vector<WktRecord> out;
  const auto& storeys = footprints.storeys;
  for (std::size_t i = 0; i < storeys.size(); ++i) {
    const auto& fp = storeys[i];
    if (fp.empty()) continue;
    WktRecord r;
    r.storey_name = fp.storey;
    r.frame = frame;
    r.base_elevation_m = fp.elevation + dz;
    double top = i + 1 < storeys.size() ? storeys[i + 1].elevation : building_top.value_or(fp.elevation);
    r.top_elevation_m = std::max(top, fp.elevation) + dz;
    if (fp.polygons.size() == 1) {
      r.wkt = "POLYGON (" + ring_text(fp.polygons[0].ring, xf) + ")";
    } else {
      r.wkt = "MULTIPOLYGON (";
      for (std::size_t p = 0; p < fp.polygons.size(); ++p) {
        if (p) r.wkt += ", ";
        r.wkt += "(" + ring_text(fp.polygons[p].ring, xf) + ")";
      }
      r.wkt += ")";
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

Json storeys_json(const FederatedModel& model) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < model.storeys.size(); ++i) {
    const auto& s = model.storeys[i];
    Json j;
    j["index"] = i;
    j["name"] = s.name;
    j["elevation_m"] = round_to(s.elevation, 3);
    j["element_count"] = s.element_ids.size();
    j["ground"] = i == model.ground_storey;
    Json notes = Json::array();
    for (const auto& n : s.repair_notes) {
      Json nj;
      nj["element"] = n.element.str();
      nj["action"] = std::string(to_string(n.action));
      nj["reason"] = n.reason;
      notes.push_back(std::move(nj));
    }
    j["repair_notes"] = std::move(notes);
    arr.push_back(std::move(j));
  }
  return arr;
}

Json footprint_params_json(const FootprintParams& p) {
  Json j;
  j["cut_offset"] = p.cut_offset;
  j["sample_spacing"] = p.sample_spacing;
  j["dbscan_eps"] = p.dbscan_eps;
  j["dbscan_min_pts"] = p.dbscan_min_pts;
  j["hull_k"] = p.hull_k;
  return j;
}

Json regulation_params_json(const RegulationParams& p) {
  Json j;
  j["max_height_m"] = p.max_height_m;
  j["derogation_margin_m"] = p.derogation_margin_m;
  j["base_max_height_m"] = p.base_max_height_m;
  j["ceiling_ensemble_offset_m"] = p.ceiling_ensemble_offset_m;
  j["ensemble_window_min_m"] = p.ensemble_window_min_m;
  j["ensemble_window_max_m"] = p.ensemble_window_max_m;
  j["top_to_base_max_ratio"] = p.top_to_base_max_ratio;
  j["part_split_threshold_pct"] = p.part_split_threshold_pct;
  Json lines = Json::array();
  for (const auto& l : p.overhang_lines) {
    Json lj;
    lj["label"] = l.label;
    lj["a"] = {l.a.x(), l.a.y()};
    lj["b"] = {l.b.x(), l.b.y()};
    lj["side"] = std::string(to_string(l.side));
    lj["limit_m"] = p.limit_for(l);
    lines.push_back(std::move(lj));
  }
  j["overhang_lines"] = std::move(lines);
  Json defaults = Json::object();
  for (const auto& [label, limit] : p.default_overhang_limits) defaults[label] = limit;
  j["default_overhang_limits"] = std::move(defaults);
  j["bike_keywords"] = p.bike_keywords;
  j["lint_proxy_ratio"] = p.lint_proxy_ratio;
  j["lint_overlap_ratio"] = p.lint_overlap_ratio;
  j["lint_outlier_margin_m"] = p.lint_outlier_margin_m;
  return j;
}

Json repair_params_json(const RepairParams& p) {
  Json j;
  j["elev_buffer"] = p.elev_buffer;
  j["min_elements"] = p.min_elements;
  j["span_policy"] = "keep";
  return j;
}

Json footprints_json(const FootprintSet& fs) {
  Json j;
  j["parameters"] = footprint_params_json(fs.params);
  Json storeys = Json::array();
  for (const auto& fp : fs.storeys) {
    Json s;
    s["name"] = fp.storey;
    s["elevation_m"] = round_to(fp.elevation, 3);
    s["cut_z_m"] = round_to(fp.cut_z, 3);
    s["area_m2"] = round_to(fp.area(), 3);
    Json polys = Json::array();
    for (const auto& p : fp.polygons) {
      Json ring = Json::array();
      for (const auto& v : p.ring) ring.push_back({round_to(v.x(), 3), round_to(v.y(), 3)});
      polys.push_back(std::move(ring));
    }
    s["polygons"] = std::move(polys);
    s["segment_count"] = fp.segment_count;
    s["sample_count"] = fp.sample_count;
    s["warnings"] = fp.warnings;
    storeys.push_back(std::move(s));
  }
  j["storeys"] = std::move(storeys);
  j["warnings"] = fs.warnings;
  return j;
}

Json overlaps_json(const FootprintSet& fs) {
  Json j;
  j["parameters"] = footprint_params_json(fs.params);
  j["reference_storey"] = fs.storeys.at(fs.reference_storey).storey;
  Json rows = Json::array();
  for (std::size_t i = 0; i < fs.storeys.size(); ++i) {
    Json r;
    r["storey"] = fs.storeys[i].storey;
    r["elevation_m"] = round_to(fs.storeys[i].elevation, 3);
    r["area_m2"] = round_to(fs.storeys[i].area(), 3);
    r["polygon_count"] = fs.storeys[i].polygons.size();
    r["overlap_pct"] = i < fs.overlaps.size() ? round_to(fs.overlaps[i], 1) : 0.0;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["warnings"] = fs.warnings;
  return j;
}

Json overhang_json(const FederatedModel& model, const std::vector<OverhangResult>& results) {
  Json arr = Json::array();
  for (const auto& r : results) {
    Json j;
    j["label"] = r.line.label;
    j["a"] = {round_to(r.line.a.x(), 3), round_to(r.line.a.y(), 3)};
    j["b"] = {round_to(r.line.b.x(), 3), round_to(r.line.b.y(), 3)};
    j["side"] = std::string(to_string(r.line.side));
    j["limit_m"] = round_to(r.limit_m, 3);
    j["max_m"] = round_to(r.max_m, 3);
    j["max_storey"] = r.max_storey ? Json(model.storeys[*r.max_storey].name) : Json(nullptr);
    j["max_element"] = r.max_element ? Json(r.max_element->str()) : Json(nullptr);
    j["verdict"] = std::string(to_string(r.max_m > r.limit_m + 1e-9 ? Verdict::Fail : Verdict::Pass));
    Json per = Json::array();
    for (const auto& [s, d] : r.per_storey) {
      Json ps;
      ps["storey"] = model.storeys[s].name;
      ps["distance_m"] = round_to(d, 3);
      per.push_back(std::move(ps));
    }
    j["per_storey"] = std::move(per);
    arr.push_back(std::move(j));
  }
  return arr;
}

Json findings_json(const std::vector<LintFinding>& findings) {
  Json arr = Json::array();
  for (const auto& f : findings) {
    Json j;
    j["code"] = f.code;
    j["message"] = f.message;
    j["value"] = f.value ? Json(round_to(*f.value, 3)) : Json(nullptr);
    j["evidence"] = f.evidence;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json wkt_json(const std::vector<WktRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) {
    Json j;
    j["storey"] = r.storey_name;
    j["frame"] = std::string(to_string(r.frame));
    j["wkt"] = r.wkt;
    j["base_elevation_m"] = round_to(r.base_elevation_m, 3);
    j["top_elevation_m"] = round_to(r.top_elevation_m, 3);
    arr.push_back(std::move(j));
  }
  return arr;
}

Json report_json(const CheckReport& r) {
  Json j;
  j["format"] = "geobim-report/1";
  Json models = Json::array();
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    Json m;
    m["file"] = r.models[i];
    m["fingerprint"] = i < r.fingerprints.size() ? Json(r.fingerprints[i]) : Json(nullptr);
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  Json params;
  params["footprint"] = footprint_params_json(r.footprint_params);
  params["regulation"] = regulation_params_json(r.regulation_params);
  params["repair"] = repair_params_json(r.repair_params);
  j["parameters"] = std::move(params);

  Json summary;
  summary["verdict"] = std::string(to_string(r.overall()));
  summary["max_height_m"] = round_to(r.max_height_m, 3);
  summary["ground_storey"] = r.ground_storey;
  j["summary"] = std::move(summary);

  Json rules = Json::array();
  for (const auto& e : r.entries) {
    Json ej;
    ej["rule"] = e.rule;
    ej["verdict"] = std::string(to_string(e.verdict));
    Json ms = Json::array();
    for (const auto& m : e.measured) ms.push_back(measurement_json(m));
    ej["measured"] = std::move(ms);
    ej["evidence"] = e.evidence;
    ej["notes"] = e.notes;
    rules.push_back(std::move(ej));
  }
  j["rules"] = std::move(rules);

  Json storeys = Json::array();
  for (std::size_t i = 0; i < r.footprints.storeys.size(); ++i) {
    const auto& fp = r.footprints.storeys[i];
    Json s;
    s["name"] = fp.storey;
    s["elevation_m"] = round_to(fp.elevation, 3);
    s["area_m2"] = round_to(fp.area(), 3);
    s["polygon_count"] = fp.polygons.size();
    s["overlap_pct"] = i < r.footprints.overlaps.size() ? Json(round_to(r.footprints.overlaps[i], 1)) : Json(nullptr);
    std::string role;
    for (const auto& p : r.segmentation.parts)
      if (i >= p.first && i <= p.last) role = to_string(p.role);
    s["part"] = role;
    storeys.push_back(std::move(s));
  }
  j["storeys"] = std::move(storeys);

  Json parts = Json::array();
  for (const auto& p : r.segmentation.parts) {
    Json pj;
    pj["role"] = std::string(to_string(p.role));
    pj["first_storey"] = r.footprints.storeys.at(p.first).storey;
    pj["last_storey"] = r.footprints.storeys.at(p.last).storey;
    pj["mean_area_m2"] = round_to(p.area, 3);
    parts.push_back(std::move(pj));
  }
  j["parts"] = std::move(parts);

  Json overhang = Json::array();
  for (const auto& o : r.overhang) {
    Json oj;
    oj["label"] = o.line.label;
    oj["limit_m"] = round_to(o.limit_m, 3);
    oj["max_m"] = round_to(o.max_m, 3);
    oj["max_storey"] = o.max_storey ? Json(r.footprints.storeys.at(*o.max_storey).storey) : Json(nullptr);
    oj["max_element"] = o.max_element ? Json(o.max_element->str()) : Json(nullptr);
    overhang.push_back(std::move(oj));
  }
  j["overhang"] = std::move(overhang);

  Json parking;
  parking["car_count"] = r.parking.car_count;
  Json cars = Json::array();
  for (const auto& k : r.parking.car_elements) cars.push_back(k.str());
  parking["car_elements"] = std::move(cars);
  parking["bike_evidence"] = r.parking.bike_evidence;
  j["parking"] = std::move(parking);

  j["findings"] = findings_json(r.findings);
  j["warnings"] = r.warnings;
  return j;
}

Json error_json(const std::string& code, const std::string& message, const std::string& detail) {
  Json j;
  j["error"] = {{"code", code}, {"message", message}, {"detail", detail}};
  return j;
}

std::string dump(const Json& body) { return body.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV

std::string overlaps_csv(const FootprintSet& fs) {
  std::string out = "storey,elevation_m,area_m2,polygon_count,overlap_pct\n";
  for (std::size_t i = 0; i < fs.storeys.size(); ++i) {
    const auto& fp = fs.storeys[i];
    out += csv_field(fp.storey) + "," + fixed(fp.elevation, 3) + "," + fixed(fp.area(), 3) + "," +
           std::to_string(fp.polygons.size()) + "," + (i < fs.overlaps.size() ? fixed(fs.overlaps[i], 1) : "") + "\n";
  }
  return out;
}

std::string wkt_csv(const std::vector<WktRecord>& records) {
  std::string out = "storey,frame,wkt,base_elevation_m,top_elevation_m\n";
  for (const auto& r : records)
    out += csv_field(r.storey_name) + "," + std::string(to_string(r.frame)) + "," + csv_field(r.wkt) + "," +
           fixed(r.base_elevation_m, 3) + "," + fixed(r.top_elevation_m, 3) + "\n";
  return out;
}

std::string verdicts_csv(const CheckReport& report) {
  std::string out = "rule,verdict\n";
  for (const auto& e : report.entries) out += csv_field(e.rule) + "," + std::string(to_string(e.verdict)) + "\n";
  out += "overall," + std::string(to_string(report.overall())) + "\n";
  return out;
}

}  // namespace geobim
