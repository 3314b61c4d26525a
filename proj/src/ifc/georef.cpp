#include <cmath>

#include "geobim/ifc.hpp"
#include "geobim/ifc_geometry.hpp"

namespace geobim {

namespace {

std::optional<double> compound_angle(const StepValue& v) {
  auto parts = v.number_list();
  if (parts.empty()) return v.number();
  const double sign = (parts[0] < 0 || (parts.size() > 1 && parts[1] < 0)) ? -1.0 : 1.0;
  double deg = std::abs(parts[0]);
  if (parts.size() > 1) deg += std::abs(parts[1]) / 60.0;
  if (parts.size() > 2) deg += std::abs(parts[2]) / 3600.0;
  if (parts.size() > 3) deg += std::abs(parts[3]) / 3600e6;
  return sign * deg;
}

}  // namespace

std::string_view to_string(LoGeoRef level) {
  switch (level) {
    case LoGeoRef::None: return "none";
    case LoGeoRef::L20: return "20";
    case LoGeoRef::L30: return "30";
    case LoGeoRef::L40: return "40";
    case LoGeoRef::L50: return "50";
  }
  return "none";
}

GeoRef extract_georeference(const IfcGraph& graph) {
  GeoRef geo;
  constexpr double kNonZero = 1e-3;  // meters

  auto sites = graph.of_class("IFCSITE");
  if (!sites.empty()) {
    const auto& site = *sites.front();
    geo.ref_latitude = compound_angle(attribute(graph, site, "RefLatitude"));
    geo.ref_longitude = compound_angle(attribute(graph, site, "RefLongitude"));
    if (attribute(graph, site, "ObjectPlacement").ref()) geo.site_origin = resolve_placement(graph, site.id).translation();
  }

  bool wcs_offset = false;
  for (const auto* ctx : graph.of_class("IFCGEOMETRICREPRESENTATIONCONTEXT")) {
    if (const auto* tn = follow(graph, *ctx, "TrueNorth"); tn && !geo.true_north) {
      auto r = attribute(graph, *tn, "DirectionRatios").number_list();
      if (r.size() >= 2 && std::hypot(r[0], r[1]) > 1e-12) geo.true_north = Vec2(r[0], r[1]).normalized();
    }
    if (const auto* wcs = follow(graph, *ctx, "WorldCoordinateSystem"))
      wcs_offset = wcs_offset || axis_placement(graph, *wcs).translation().norm() > kNonZero;
  }

  if (!graph.of_class("IFCMAPCONVERSION").empty()) geo.logeoref_level = LoGeoRef::L50;
  else if (wcs_offset) geo.logeoref_level = LoGeoRef::L40;
  else if (geo.site_origin && geo.site_origin->norm() > kNonZero) geo.logeoref_level = LoGeoRef::L30;
  else if (geo.ref_latitude && geo.ref_longitude) geo.logeoref_level = LoGeoRef::L20;
  return geo;
}

}  // namespace geobim
