#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "geobim/config.hpp"
#include "geobim/error.hpp"

namespace geobim {

namespace {

[[noreturn]] void bad(std::string_view section, std::string_view key, const std::string& why) {
  throw Error(ErrorCode::InvalidParams, why, std::string(section) + "." + std::string(key));
}

std::string trimmed(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view section, std::string_view key, std::string_view text) {
  const std::string s = trimmed(text);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  bad(section, key, "'" + s + "' is not a number");
}

std::size_t to_count(std::string_view section, std::string_view key, std::string_view text) {
  const std::string s = trimmed(text);
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size() && v >= 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  bad(section, key, "'" + s + "' is not a non-negative integer");
}

bool to_bool(std::string_view section, std::string_view key, std::string_view text) {
  const std::string s = trimmed(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(section, key, "'" + s + "' is not a boolean");
}

std::vector<std::string> to_list(std::string_view text) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trimmed(item); !t.empty()) out.push_back(t);
  return out;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw Error(ErrorCode::InvalidParams, "expected a scalar value", v.dump());
}

OverhangLine line_from_json(const Json& v) {
  if (v.is_string()) return OverhangLine::parse(v.get<std::string>());
  if (!v.is_object()) throw Error(ErrorCode::InvalidParams, "overhang line must be a string or an object", v.dump());
  try {
    OverhangLine l;
    l.label = v.value("label", "");
    const auto& a = v.at("a");
    const auto& b = v.at("b");
    l.a = Vec2(a.at(0).get<double>(), a.at(1).get<double>());
    l.b = Vec2(b.at(0).get<double>(), b.at(1).get<double>());
    const std::string side = v.value("side", "left");
    if (side == "left") l.side = Side::Left;
    else if (side == "right") l.side = Side::Right;
    else throw Error(ErrorCode::InvalidParams, "overhang line side must be left or right", side);
    if (v.contains("limit_m") && !v["limit_m"].is_null()) l.limit_m = v["limit_m"].get<double>();
    if ((l.b - l.a).norm() < 1e-9) throw Error(ErrorCode::InvalidParams, "overhang line endpoints coincide", l.label);
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, "malformed overhang line", e.what());
  }
}

}  // namespace

void Settings::validate() const {
  footprint.validate();
  regulation.validate();
  if (!(repair.elev_buffer >= 0)) throw Error(ErrorCode::InvalidParams, "repair.elev_buffer must not be negative");
  if (!(federate.merge_tolerance >= 0) || !(federate.frame_tolerance >= 0))
    throw Error(ErrorCode::InvalidParams, "model tolerances must not be negative");
}

void set_option(Settings& s, std::string_view section, std::string_view key, std::string_view value) {
  auto num = [&] { return to_double(section, key, value); };
  if (section == "footprint") {
    auto& f = s.footprint;
    if (key == "cut_offset") f.cut_offset = num();
    else if (key == "sample_spacing") f.sample_spacing = num();
    else if (key == "dbscan_eps") f.dbscan_eps = num();
    else if (key == "dbscan_min_pts") f.dbscan_min_pts = to_count(section, key, value);
    else if (key == "hull_k") f.hull_k = to_count(section, key, value);
    else bad(section, key, "unknown footprint key");
  } else if (section == "regulation") {
    auto& r = s.regulation;
    if (key == "max_height_m") r.max_height_m = num();
    else if (key == "derogation_margin_m") r.derogation_margin_m = num();
    else if (key == "base_max_height_m") r.base_max_height_m = num();
    else if (key == "ceiling_ensemble_offset_m") r.ceiling_ensemble_offset_m = num();
    else if (key == "ensemble_window_min_m") r.ensemble_window_min_m = num();
    else if (key == "ensemble_window_max_m") r.ensemble_window_max_m = num();
    else if (key == "top_to_base_max_ratio") r.top_to_base_max_ratio = num();
    else if (key == "part_split_threshold_pct") r.part_split_threshold_pct = num();
    else if (key == "bike_keywords") r.bike_keywords = to_list(value);
    else if (key == "lint_proxy_ratio") r.lint_proxy_ratio = num();
    else if (key == "lint_overlap_ratio") r.lint_overlap_ratio = num();
    else if (key == "lint_outlier_margin_m") r.lint_outlier_margin_m = num();
    else bad(section, key, "unknown regulation key");
  } else if (section == "overhang") {
    // any key naming a line, e.g. line1 = 0,30,40,30,left,Hertekade,10
    if (key.rfind("line", 0) != 0) bad(section, key, "overhang keys must start with 'line'");
    s.regulation.overhang_lines.push_back(OverhangLine::parse(value));
  } else if (section == "overhang_limits") {
    s.regulation.default_overhang_limits[std::string(key)] = num();
  } else if (section == "repair") {
    if (key == "elev_buffer") s.repair.elev_buffer = num();
    else if (key == "min_elements") s.repair.min_elements = to_count(section, key, value);
    else if (key == "span_policy") {
      if (trimmed(value) != "keep") bad(section, key, "only span_policy = keep is supported");
    } else bad(section, key, "unknown repair key");
  } else if (section == "model") {
    if (key == "ground_storey") {
      auto v = trimmed(value);
      if (v.empty()) s.federate.ground_storey.reset();
      else s.federate.ground_storey = v;
    } else if (key == "allow_frame_mismatch") s.federate.allow_frame_mismatch = to_bool(section, key, value);
    else if (key == "merge_tolerance") s.federate.merge_tolerance = num();
    else if (key == "frame_tolerance") s.federate.frame_tolerance = num();
    else bad(section, key, "unknown model key");
  } else {
    bad(section, key, "unknown section");
  }
}

Settings parse_config(std::string_view text, Settings base) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidParams, "malformed configuration", e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw Error(ErrorCode::InvalidParams, "configuration keys must sit inside a section", section);
    for (const auto& [key, value] : body) set_option(base, section, key, value.data());
  }
  base.validate();
  return base;
}

Settings load_config_file(const std::string& path, Settings base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read configuration file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_json(Settings& s, const Json& body) {
  if (!body.is_object()) throw Error(ErrorCode::InvalidParams, "request body must be a JSON object");
  for (const char* section : {"footprint", "regulation", "repair", "model"}) {
    if (!body.contains(section)) continue;
    const Json& sec = body.at(section);
    if (!sec.is_object()) throw Error(ErrorCode::InvalidParams, std::string(section) + " must be an object");
    for (const auto& [key, v] : sec.items()) {
      if (std::string_view(section) == "regulation" && key == "overhang_lines") {
        if (!v.is_array()) throw Error(ErrorCode::InvalidParams, "overhang_lines must be an array");
        s.regulation.overhang_lines.clear();
        for (const auto& l : v) s.regulation.overhang_lines.push_back(line_from_json(l));
      } else if (std::string_view(section) == "regulation" && key == "default_overhang_limits") {
        if (!v.is_object()) throw Error(ErrorCode::InvalidParams, "default_overhang_limits must be an object");
        for (const auto& [label, limit] : v.items()) set_option(s, "overhang_limits", label, scalar_text(limit));
      } else if (std::string_view(section) == "regulation" && key == "bike_keywords" && v.is_array()) {
        s.regulation.bike_keywords.clear();
        for (const auto& kw : v) s.regulation.bike_keywords.push_back(scalar_text(kw));
      } else if (v.is_null() && std::string_view(section) == "model" && key == "ground_storey") {
        s.federate.ground_storey.reset();
      } else {
        set_option(s, section, key, scalar_text(v));
      }
    }
  }
  s.validate();
}

}  // namespace geobim
