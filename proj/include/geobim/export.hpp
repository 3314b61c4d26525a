#pragma once

// WKT footprints for GIS, JSON bodies shared by the CLI and the HTTP service, CSV tables.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geobim/checks.hpp"
#include "geobim/footprint.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

using Json = nlohmann::ordered_json;

enum class Frame { ModelLocal, SiteProjected };
std::string_view to_string(Frame frame);
/// "local" | "model-local" | "projected" | "site-projected". Throws Error{InvalidParams}.
Frame parse_frame(std::string_view text);

struct WktRecord {
  std::string storey_name;
  std::string wkt;
  Frame frame = Frame::ModelLocal;
  double base_elevation_m = 0.0;
  double top_elevation_m = 0.0;
};

/// Site-local plan coordinates to map coordinates: TrueNorth rotation, then site origin.
/// Throws Error{NoGeoreference} when the site origin is unknown.
Eigen::Affine2d site_projection(const GeoRef& georef);

/// One record per non-empty storey, POLYGON or MULTIPOLYGON at millimetre precision.
/// `building_top` closes the extrusion interval of the highest storey.
/// Throws Error{NoGeoreference} for the projected frame without a site origin.
std::vector<WktRecord> to_wkt(const FootprintSet& footprints, const GeoRef& georef, Frame frame,
                              std::optional<double> building_top = std::nullopt);

/// Fixed-decimal rounding used for every number in JSON bodies; never yields -0.
double round_to(double value, int decimals);

Json storeys_json(const FederatedModel& model);
Json footprints_json(const FootprintSet& footprints);
Json overlaps_json(const FootprintSet& footprints);
Json overhang_json(const FederatedModel& model, const std::vector<OverhangResult>& results);
Json findings_json(const std::vector<LintFinding>& findings);
Json wkt_json(const std::vector<WktRecord>& records);
Json footprint_params_json(const FootprintParams& params);
Json regulation_params_json(const RegulationParams& params);
Json repair_params_json(const RepairParams& params);
Json report_json(const CheckReport& report);
Json error_json(const std::string& code, const std::string& message, const std::string& detail = {});

/// Two-space indented body with a trailing newline. Identical for CLI files and HTTP bodies.
std::string dump(const Json& body);

/// storey,elevation_m,area_m2,polygon_count,overlap_pct
std::string overlaps_csv(const FootprintSet& footprints);
/// storey,frame,wkt,base_elevation_m,top_elevation_m
std::string wkt_csv(const std::vector<WktRecord>& records);
/// rule,verdict followed by an overall row.
std::string verdicts_csv(const CheckReport& report);

}  // namespace geobim
