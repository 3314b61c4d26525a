#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "geobim/checks.hpp"
#include "geobim/error.hpp"

namespace geobim {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
}

std::string fixed(double v, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << v;
  return out.str();
}

std::string storey_ref(const FederatedModel& model, std::size_t i) { return "storey:" + model.storeys[i].name; }

[[noreturn]] void invalid(const std::string& what, const std::string& message) {
  throw Error(ErrorCode::InvalidParams, message, what);
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NeedsReview: return "needs-review";
  }
  return "pass";
}

std::string_view to_string(PartRole role) {
  switch (role) {
    case PartRole::Base: return "base";
    case PartRole::Top: return "top";
    case PartRole::Other: return "other";
  }
  return "other";
}

OverhangLine OverhangLine::parse(std::string_view text) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  if (fields.size() < 5 || fields.size() > 7)
    invalid("line", "overhang line must be x1,y1,x2,y2,side,label,limit: '" + std::string(text) + "'");
  OverhangLine line;
  double v[4];
  for (int i = 0; i < 4; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(fields[i], &used);
      if (used != fields[i].size() || !std::isfinite(v[i])) throw std::invalid_argument("");
    } catch (const std::exception&) {
      invalid("line", "overhang line coordinate '" + fields[i] + "' is not a number");
    }
  }
  line.a = Vec2(v[0], v[1]);
  line.b = Vec2(v[2], v[3]);
  const std::string side = lower(fields[4]);
  if (side == "left") line.side = Side::Left;
  else if (side == "right") line.side = Side::Right;
  else invalid("line", "overhang line side must be left or right, got '" + fields[4] + "'");
  if (fields.size() > 5) line.label = fields[5];
  if (fields.size() > 6 && !fields[6].empty()) {
    try {
      std::size_t used = 0;
      double limit = std::stod(fields[6], &used);
      if (used != fields[6].size()) throw std::invalid_argument("");
      line.limit_m = limit;
    } catch (const std::exception&) {
      invalid("line", "overhang line limit '" + fields[6] + "' is not a number");
    }
  }
  if ((line.b - line.a).norm() < 1e-9) invalid("line", "overhang line endpoints coincide");
  return line;
}

double RegulationParams::limit_for(const OverhangLine& line) const {
  if (line.limit_m) return *line.limit_m;
  const std::string label = lower(line.label);
  for (const auto& [name, limit] : default_overhang_limits)
    if (lower(name) == label) return limit;
  for (const auto& [name, limit] : default_overhang_limits)
    if (!name.empty() && label.find(lower(name)) != std::string::npos) return limit;
  invalid("line", "overhang line '" + line.label + "' has no limit and no default applies");
}

void RegulationParams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) invalid(what, std::string("regulation parameter ") + what + " must be positive");
  };
  positive(max_height_m, "max_height_m");
  positive(base_max_height_m, "base_max_height_m");
  if (!(derogation_margin_m >= 0)) invalid("derogation_margin_m", "derogation margin must not be negative");
  if (!(ceiling_ensemble_offset_m >= 0)) invalid("ceiling_ensemble_offset_m", "ceiling offset must not be negative");
  if (!(ensemble_window_min_m <= ensemble_window_max_m)) invalid("ensemble_window", "ensemble window is inverted");
  if (!(top_to_base_max_ratio > 0 && top_to_base_max_ratio <= 1))
    invalid("top_to_base_max_ratio", "top_to_base_max_ratio must lie in (0, 1]");
  if (!(part_split_threshold_pct >= 0)) invalid("part_split_threshold_pct", "split threshold must not be negative");
  for (const auto& line : overhang_lines) {
    if ((line.b - line.a).norm() < 1e-9) invalid("line", "overhang line '" + line.label + "' has coincident endpoints");
    positive(limit_for(line), "overhang limit");
  }
  for (const auto& [label, limit] : default_overhang_limits) positive(limit, "overhang limit");
}

// ---------------------------------------------------------------------------
// Segmentation

std::optional<std::size_t> PartSegmentation::base_part() const {
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].role == PartRole::Base) return i;
  return std::nullopt;
}

std::vector<std::size_t> PartSegmentation::top_storeys() const {
  std::vector<std::size_t> out;
  for (const auto& p : parts)
    if (p.role == PartRole::Top)
      for (std::size_t s = p.first; s <= p.last; ++s) out.push_back(s);
  return out;
}

PartSegmentation segment_building_parts(std::span<const double> areas, double threshold_pct, std::size_t ground) {
  PartSegmentation seg;
  const std::size_t n = areas.size();
  if (n == 0) return seg;
  const double t = threshold_pct / 100.0;

  std::vector<double> change(n, 0.0), step(n, 0.0);
  std::vector<bool> stepped(n, false);
  for (std::size_t i = 1; i < n; ++i) {
    const double hi = std::max(areas[i], areas[i - 1]);
    change[i] = hi > 0 ? std::abs(areas[i] - areas[i - 1]) / hi : 0.0;
    if (areas[i] > 0 && areas[i - 1] > 0) {
      step[i] = std::log(areas[i] / areas[i - 1]);
      stepped[i] = true;
    }
  }
  std::vector<bool> cut(n, false);
  for (std::size_t i = 1; i < n; ++i) cut[i] = t < 1.0 && change[i] > 0 && change[i] >= t;
  // A run of similar moderate steps is a staggered facade, not a new body.
  std::vector<bool> keep = cut;
  for (std::size_t i = 1; i < n; ++i) {
    if (!cut[i] || !stepped[i] || change[i] >= 2 * t) continue;
    for (std::size_t j : {i - 1, i + 1}) {
      if (j < 1 || j >= n || !stepped[j]) continue;
      if (std::abs(step[i] - step[j]) < t) keep[i] = false;
    }
  }

  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && !keep[i]) continue;
    BuildingPart part;
    part.first = start;
    part.last = i - 1;
    double sum = 0;
    for (std::size_t s = part.first; s <= part.last; ++s) sum += areas[s];
    part.area = sum / static_cast<double>(part.last - part.first + 1);
    seg.parts.push_back(part);
    start = i;
  }
  ground = std::min(ground, n - 1);
  bool above = false;
  for (auto& p : seg.parts) {
    if (ground >= p.first && ground <= p.last) {
      p.role = PartRole::Base;
      above = true;
    } else {
      p.role = above ? PartRole::Top : PartRole::Other;
    }
  }
  return seg;
}

PartSegmentation segment_building_parts(const FootprintSet& footprints, double threshold_pct, std::size_t ground) {
  std::vector<double> areas;
  for (const auto& fp : footprints.storeys) areas.push_back(fp.area());
  return segment_building_parts(areas, threshold_pct, ground);
}

// ---------------------------------------------------------------------------
// Heights

CheckEntry check_max_height(const FederatedModel& model, const RegulationParams& params) {
  CheckEntry e;
  e.rule = "max_height";
  double top = -std::numeric_limits<double>::infinity();
  std::optional<ElementKey> highest;
  for (const auto& [key, el] : model.elements) {
    if (!el.solid() || !el.mesh) continue;
    for (const auto& v : el.mesh->vertices)
      if (v.z() > top) {
        top = v.z();
        highest = key;
      }
  }
  if (!highest) throw Error(ErrorCode::EmptyModel, "model has no solid geometry");
  const double ground = model.storeys[model.ground_storey].elevation;
  const double height = top - ground;
  e.measured = {{"max_height", height, "m"},
                {"limit", params.max_height_m, "m"},
                {"derogation_margin", params.derogation_margin_m, "m"}};
  e.evidence = {highest->str(), storey_ref(model, model.ground_storey)};
  if (height <= params.max_height_m + 1e-9) {
    e.verdict = Verdict::Pass;
  } else if (height <= params.max_height_m + params.derogation_margin_m + 1e-9) {
    e.verdict = Verdict::NeedsReview;
    e.notes.push_back("height exceeds the limit by " + fixed(height - params.max_height_m, 2) +
                      " m; a derogation applies when the excess is mainly occupied by installations");
  } else {
    e.verdict = Verdict::Fail;
    e.notes.push_back("height exceeds the limit by " + fixed(height - params.max_height_m, 2) +
                      " m, beyond the derogation margin");
  }
  return e;
}

std::optional<double> measure_ensemble_thickness(const FederatedModel& model, std::size_t storey) {
  const Storey& s = model.storeys.at(storey);
  std::optional<double> lowest;
  for (auto key : s.element_ids) {
    const Element* el = model.element(key);
    if (!el || !el->solid() || !el->mesh) continue;
    for (const auto& v : el->mesh->vertices)
      if (v.z() < s.elevation - 1e-9 && (!lowest || v.z() < *lowest)) lowest = v.z();
  }
  if (!lowest) return std::nullopt;
  return s.elevation - *lowest;
}

CheckEntry check_base_height(const FederatedModel& model, const PartSegmentation& segmentation,
                             const RegulationParams& params) {
  CheckEntry e;
  e.rule = "base_height";
  auto tops = segmentation.top_storeys();
  if (!segmentation.base_part() || tops.empty()) {
    e.verdict = Verdict::Pass;
    e.notes.push_back("single-part building: no top part, rule vacuously satisfied");
    return e;
  }
  const std::size_t lowest_top = tops.front();
  const double ground = model.storeys[model.ground_storey].elevation;
  const double elevation = model.storeys[lowest_top].elevation;
  const double raw = elevation - ground;
  const double corrected = raw - params.ceiling_ensemble_offset_m;
  e.measured = {{"elevation_difference", raw, "m"},
                {"base_height", corrected, "m"},
                {"ceiling_ensemble_offset", params.ceiling_ensemble_offset_m, "m"},
                {"limit", params.base_max_height_m, "m"}};
  e.evidence = {storey_ref(model, lowest_top), storey_ref(model, model.ground_storey)};
  if (auto thickness = measure_ensemble_thickness(model, lowest_top)) {
    e.measured.push_back({"ensemble_thickness", *thickness, "m"});
    const bool within = *thickness >= params.ensemble_window_min_m - 1e-9 && *thickness <= params.ensemble_window_max_m + 1e-9;
    e.notes.push_back("measured ceiling ensemble " + fixed(*thickness, 3) + " m is " + (within ? "within" : "outside") +
                      " the [" + fixed(params.ensemble_window_min_m, 2) + ", " + fixed(params.ensemble_window_max_m, 2) +
                      "] m window");
  }
  e.verdict = corrected <= params.base_max_height_m + 1e-9 ? Verdict::Pass : Verdict::Fail;
  return e;
}

// ---------------------------------------------------------------------------
// Top overlap

CheckEntry check_top_overlap(const FootprintSet& footprints, const PartSegmentation& segmentation,
                             const RegulationParams& params) {
  CheckEntry e;
  e.rule = "top_overlap";
  auto base = segmentation.base_part();
  auto tops = segmentation.top_storeys();
  if (!base || tops.empty()) {
    e.verdict = Verdict::Pass;
    e.notes.push_back("single-part building: no top part, rule vacuously satisfied");
    return e;
  }
  const std::size_t reference = segmentation.parts[*base].last;
  const auto& ref = footprints.storeys.at(reference);
  const double limit = 100.0 * params.top_to_base_max_ratio;
  e.measured.push_back({"limit", limit, "%"});
  e.evidence.push_back("storey:" + ref.storey);
  if (ref.empty()) throw Error(ErrorCode::ZeroReference, "base reference storey '" + ref.storey + "' has no footprint", ref.storey);
  double worst = 0.0;
  for (auto s : tops) {
    const auto& fp = footprints.storeys.at(s);
    const double pct = fp.empty() ? 0.0 : overlap_percentage(fp.polygons, ref.polygons);
    e.measured.push_back({"overlap:" + fp.storey, pct, "%"});
    worst = std::max(worst, pct);
    if (pct > limit + 1e-9) {
      e.evidence.push_back("storey:" + fp.storey);
      for (std::size_t p = 0; p < fp.polygons.size(); ++p)
        e.evidence.push_back("storey:" + fp.storey + "/polygon:" + std::to_string(p));
    }
  }
  e.measured.insert(e.measured.begin(), {"max_overlap", worst, "%"});
  e.verdict = worst <= limit + 1e-9 ? Verdict::Pass : Verdict::Fail;
  e.notes.push_back("reference: highest base storey '" + ref.storey + "'");
  return e;
}

// ---------------------------------------------------------------------------
// Overhang

std::vector<OverhangResult> overhang_distances(const FederatedModel& model, std::span<const std::size_t> target_storeys,
                                               std::span<const OverhangLine> lines, const RegulationParams& params) {
  const bool explicit_targets = !target_storeys.empty();
  std::vector<std::size_t> targets(target_storeys.begin(), target_storeys.end());
  if (!explicit_targets)
    for (std::size_t i = 0; i < model.storeys.size(); ++i) targets.push_back(i);
  for (auto s : targets)
    if (s >= model.storeys.size()) throw Error(ErrorCode::UnknownStorey, "storey index out of range", std::to_string(s));

  std::vector<OverhangResult> results;
  for (const auto& line : lines) {
    const Vec2 d = line.b - line.a;
    if (d.norm() < 1e-9) invalid("line", "overhang line '" + line.label + "' has coincident endpoints");
    Vec2 normal(-d.y(), d.x());
    normal.normalize();
    if (line.side == Side::Right) normal = -normal;

    OverhangResult r;
    r.line = line;
    r.limit_m = params.limit_for(line);
    for (auto s : targets) {
      bool any = false;
      double best = 0.0;
      std::optional<ElementKey> best_el;
      for (auto key : model.storeys[s].element_ids) {
        const Element* el = model.element(key);
        if (!el || !el->solid() || !el->mesh) continue;
        for (const auto& v : el->mesh->vertices) {
          any = true;
          const double dist = (Vec2(v.x(), v.y()) - line.a).dot(normal);
          if (dist > best) {
            best = dist;
            best_el = key;
          }
        }
      }
      if (!any) {
        if (explicit_targets)
          throw Error(ErrorCode::NoVertices, "storey '" + model.storeys[s].name + "' has no geometry", model.storeys[s].name);
        continue;
      }
      r.per_storey.emplace_back(s, best);
      if (!r.max_storey || best > r.max_m) {
        r.max_m = best;
        r.max_storey = s;
        r.max_element = best_el;
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

CheckEntry check_overhang(const FederatedModel& model, const std::vector<OverhangResult>& results) {
  CheckEntry e;
  e.rule = "overhang";
  e.verdict = Verdict::Pass;
  for (const auto& r : results) {
    const std::string label = r.line.label.empty() ? "line" : r.line.label;
    e.measured.push_back({"overhang:" + label, r.max_m, "m"});
    e.measured.push_back({"limit:" + label, r.limit_m, "m"});
    if (r.max_m > r.limit_m + 1e-9) {
      e.verdict = Verdict::Fail;
      e.notes.push_back(label + ": " + fixed(r.max_m, 2) + " m exceeds the " + fixed(r.limit_m, 2) + " m limit by " +
                        fixed(r.max_m - r.limit_m, 2) + " m");
    }
    if (r.max_storey && r.max_m > 0) {
      e.evidence.push_back(storey_ref(model, *r.max_storey));
      if (r.max_element) e.evidence.push_back(r.max_element->str());
    }
  }
  e.notes.push_back("balconies included: every solid element of the target storeys contributes its vertices");
  return e;
}

// ---------------------------------------------------------------------------
// Parking

ParkingCount count_parking_spaces(const FederatedModel& model, std::span<const std::string> bike_keywords) {
  ParkingCount out;
  for (std::uint32_t m = 0; m < model.graphs.size(); ++m) {
    const auto& graph = *model.graphs[m];
    PropertyIndex props(graph);
    for (const auto& [id, inst] : graph.instances) {
      const bool proxy = inst.ifc_class == "IFCBUILDINGELEMENTPROXY";
      const bool space = inst.ifc_class == "IFCSPACE";
      if (!proxy && !space) continue;
      auto category = props.value(id, "Pset_ProductRequirements", "Category");
      if (category && lower(trim(*category)) == "parking") out.car_elements.push_back({m, id});
      if (space) {
        const std::string name = name_of(graph, inst);
        const std::string lname = lower(name);
        for (const auto& kw : bike_keywords)
          if (!kw.empty() && lname.find(lower(kw)) != std::string::npos) {
            out.bike_evidence.push_back(ElementKey{m, id}.str() + " " + name);
            break;
          }
      }
    }
  }
  out.car_count = out.car_elements.size();
  return out;
}

// ---------------------------------------------------------------------------
// Lint

namespace {

double volume(const Box3& b) {
  if (b.isEmpty()) return 0.0;
  const Vec3 s = b.sizes();
  return s.x() * s.y() * s.z();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

bool hosted_filler(const std::string& cls) { return cls == "IFCDOOR" || cls == "IFCWINDOW"; }

}  // namespace

std::vector<LintFinding> lint_model(const FederatedModel& model, const RegulationParams& params) {
  std::vector<LintFinding> out;

  // L0 geometry the tessellator could not mesh.
  {
    LintFinding f{"L0", "elements with unsupported geometry", {}, std::nullopt};
    for (const auto& [key, el] : model.elements)
      if (!el.unsupported.empty()) f.evidence.push_back(key.str() + " " + el.ifc_class + " " + el.unsupported);
    if (!f.evidence.empty()) {
      f.value = static_cast<double>(f.evidence.size());
      out.push_back(std::move(f));
    }
  }

  std::vector<std::pair<ElementKey, Box3>> solids;
  for (const auto& [key, el] : model.elements)
    if (el.solid() && el.mesh && !el.mesh->vertices.empty()) solids.emplace_back(key, el.mesh->bbox());

  // L1 site objects: contained in the site or building, or far outside the storey core.
  {
    LintFinding f{"L1", "site objects mixed into the building model", {}, std::nullopt};
    std::set<ElementKey> in_storey;
    for (const auto& s : model.storeys) in_storey.insert(s.element_ids.begin(), s.element_ids.end());
    std::vector<double> xs, ys;
    for (const auto& [key, box] : solids)
      if (in_storey.count(key)) {
        xs.push_back(box.center().x());
        ys.push_back(box.center().y());
      }
    std::optional<Box2> core;
    if (!xs.empty()) {
      Vec2 lo(quantile(xs, 0.05), quantile(ys, 0.05)), hi(quantile(xs, 0.95), quantile(ys, 0.95));
      const double margin = std::max(params.lint_outlier_margin_m, 0.25 * (hi - lo).maxCoeff());
      core = Box2(lo - Vec2::Constant(margin), hi + Vec2::Constant(margin));
    }
    for (const auto& [key, el] : model.elements) {
      if (!el.solid()) continue;
      if (el.container_class == "IFCSITE" || el.container_class == "IFCBUILDING") {
        f.evidence.push_back(key.str() + " contained in " + el.container_class);
        continue;
      }
      if (!core || !el.mesh || el.mesh->vertices.empty()) continue;
      const Box3 b = el.mesh->bbox();
      const Box2 plan(Vec2(b.min().x(), b.min().y()), Vec2(b.max().x(), b.max().y()));
      if (!core->intersects(plan)) f.evidence.push_back(key.str() + " outside the building core");
    }
    if (!f.evidence.empty()) {
      f.value = static_cast<double>(f.evidence.size());
      out.push_back(std::move(f));
    }
  }

  // L2 storey grouping anomalies.
  {
    LintFinding f{"L2", "storey grouping anomalies repaired", {}, std::nullopt};
    for (const auto& name : model.dissolved_storeys) f.evidence.push_back("storey:" + name + " dissolved");
    for (const auto& s : model.storeys)
      for (const auto& n : s.repair_notes)
        f.evidence.push_back("storey:" + s.name + " " + n.element.str() + " " + std::string(to_string(n.action)) + ": " + n.reason);
    for (const auto& [key, el] : model.elements)
      if (el.multi_storey) f.evidence.push_back(key.str() + " contained in several storeys");
    if (!f.evidence.empty()) {
      f.value = static_cast<double>(f.evidence.size());
      out.push_back(std::move(f));
    }
  }

  // L3 proxy usage.
  {
    std::size_t proxies = 0, total = 0;
    std::vector<std::string> ev;
    for (const auto& [key, el] : model.elements) {
      if (!el.solid() || el.kind == ElementKind::Spatial) continue;
      ++total;
      if (el.kind == ElementKind::Proxy) {
        ++proxies;
        if (ev.size() < 20) ev.push_back(key.str());
      }
    }
    const double ratio = total ? static_cast<double>(proxies) / static_cast<double>(total) : 0.0;
    if (proxies > 0 && ratio >= params.lint_proxy_ratio)
      out.push_back({"L3", "IfcBuildingElementProxy used for " + std::to_string(proxies) + " of " + std::to_string(total) +
                               " elements", ev, ratio});
  }

  // L4 intersecting elements (bounding-box proxy, sweep along x).
  {
    LintFinding f{"L4", "elements whose bounding boxes overlap", {}, std::nullopt};
    auto sorted = solids;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second.min().x() < b.second.min().x(); });
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto& [ka, ba] = sorted[i];
      const double va = volume(ba);
      if (va <= 0) continue;
      for (std::size_t j = i + 1; j < sorted.size() && sorted[j].second.min().x() < ba.max().x(); ++j) {
        const auto& [kb, bb] = sorted[j];
        const double vb = volume(bb);
        if (vb <= 0) continue;
        if (hosted_filler(model.elements.at(ka).ifc_class) || hosted_filler(model.elements.at(kb).ifc_class)) continue;
        const double inter = volume(ba.intersection(bb));
        if (inter / std::min(va, vb) >= params.lint_overlap_ratio) {
          ++pairs;
          if (f.evidence.size() < 100) {
            auto [lo, hi] = std::minmax(ka, kb);
            f.evidence.push_back(lo.str() + " " + hi.str());
          }
        }
      }
    }
    if (pairs > 0) {
      std::sort(f.evidence.begin(), f.evidence.end());
      f.value = static_cast<double>(pairs);
      out.push_back(std::move(f));
    }
  }

  // L5 georeferencing level.
  for (std::size_t m = 0; m < model.graphs.size(); ++m) {
    const auto level = model.graphs[m]->georef.logeoref_level;
    if (static_cast<int>(level) < static_cast<int>(LoGeoRef::L30)) {
      const std::string name = m < model.file_names.size() ? model.file_names[m] : "m" + std::to_string(m);
      out.push_back({"L5", "georeferencing below LoGeoRef 30 (" + std::string(to_string(level)) + ")", {"model:" + name},
                     static_cast<double>(level)});
    }
  }

  // L6 duplicate or overlapping spaces.
  {
    LintFinding f{"L6", "duplicate or overlapping spaces", {}, std::nullopt};
    std::vector<std::pair<ElementKey, Box3>> spaces;
    for (const auto& [key, el] : model.elements)
      if (el.kind == ElementKind::Space && el.mesh && !el.mesh->vertices.empty()) spaces.emplace_back(key, el.mesh->bbox());
    for (std::size_t i = 0; i < spaces.size(); ++i)
      for (std::size_t j = i + 1; j < spaces.size(); ++j) {
        const Box3& a = spaces[i].second;
        const Box3& b = spaces[j].second;
        const double inter = volume(a.intersection(b));
        const double smaller = std::min(volume(a), volume(b));
        if (smaller <= 0 || inter / smaller < params.lint_overlap_ratio) continue;
        const auto& na = model.elements.at(spaces[i].first).name;
        const auto& nb = model.elements.at(spaces[j].first).name;
        const double iou = inter / (volume(a) + volume(b) - inter);
        std::string kind = iou > 0.99 ? (na == nb ? "duplicate" : "co-located with conflicting labels") : "overlapping";
        f.evidence.push_back(spaces[i].first.str() + " '" + na + "' " + spaces[j].first.str() + " '" + nb + "' " + kind);
      }
    if (!f.evidence.empty()) {
      f.value = static_cast<double>(f.evidence.size());
      out.push_back(std::move(f));
    }
  }

  // L8 parking semantics.
  {
    auto parking = count_parking_spaces(model, params.bike_keywords);
    if (parking.car_count == 0)
      out.push_back({"L8", "parking not machine-readable: no element carries Pset_ProductRequirements.Category = Parking",
                     parking.bike_evidence, 0.0});
  }

  // L9 frame agreement.
  if (model.graphs.size() > 1 && model.frame_discrepancy_m > 0.0) {
    std::vector<std::string> ev;
    for (const auto& n : model.file_names) ev.push_back("model:" + n);
    out.push_back({"L9", "federated files are not registered in one frame", ev, model.frame_discrepancy_m});
  }
  return out;
}

// ---------------------------------------------------------------------------

Verdict CheckReport::overall() const {
  Verdict v = Verdict::Pass;
  for (const auto& e : entries) {
    if (e.verdict == Verdict::Fail) return Verdict::Fail;
    if (e.verdict == Verdict::NeedsReview) v = Verdict::NeedsReview;
  }
  return v;
}

CheckReport run_checks(const FederatedModel& model, const FootprintParams& footprint_params,
                       const RegulationParams& regulation_params, const RepairParams& repair_params,
                       std::optional<FootprintSet> footprints) {
  footprint_params.validate();
  regulation_params.validate();
  CheckReport r;
  r.models = model.file_names;
  r.fingerprints = model.fingerprints;
  r.footprint_params = footprint_params;
  r.regulation_params = regulation_params;
  r.repair_params = repair_params;
  r.ground_storey = model.storeys.at(model.ground_storey).name;
  r.max_height_m = max_height(model);

  r.footprints = footprints && footprints->params == footprint_params ? std::move(*footprints)
                                                                       : compute_footprints(model, footprint_params);
  if (!r.footprints.storeys[model.ground_storey].empty())
    r.footprints = overlap_table(std::move(r.footprints), model.ground_storey);
  else
    r.warnings.push_back("ground storey has an empty footprint; overlap table omitted");
  r.segmentation = segment_building_parts(r.footprints, regulation_params.part_split_threshold_pct, model.ground_storey);

  r.entries.push_back(check_max_height(model, regulation_params));
  r.entries.push_back(check_base_height(model, r.segmentation, regulation_params));
  r.entries.push_back(check_top_overlap(r.footprints, r.segmentation, regulation_params));
  if (!regulation_params.overhang_lines.empty()) {
    r.overhang = overhang_distances(model, {}, regulation_params.overhang_lines, regulation_params);
    r.entries.push_back(check_overhang(model, r.overhang));
  } else {
    r.warnings.push_back("no overhang lines supplied; overhang rule not evaluated");
  }
  r.parking = count_parking_spaces(model, regulation_params.bike_keywords);
  r.findings = lint_model(model, regulation_params);
  for (const auto& w : model.warnings) r.warnings.push_back(w);
  for (const auto& w : r.footprints.warnings) r.warnings.push_back(w);
  return r;
}

}  // namespace geobim
