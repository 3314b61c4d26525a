#pragma once

// Dimension rules over heights and footprints, parking semantics and model lint.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geobim/footprint.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

enum class Side { Left, Right };
std::string_view to_string(Side side);

/// Facade line; distances are positive toward `side` of the directed line a -> b.
struct OverhangLine {
  std::string label;
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  Side side = Side::Left;
  std::optional<double> limit_m;  // falls back to the default limit for the label

  /// "x1,y1,x2,y2,side,label,limit" with side left|right and limit optional.
  /// Throws Error{InvalidParams}.
  static OverhangLine parse(std::string_view text);
};

struct RegulationParams {
  double max_height_m = 100.0;
  double derogation_margin_m = 5.0;
  double base_max_height_m = 17.0;
  double ceiling_ensemble_offset_m = 0.55;
  double ensemble_window_min_m = 0.5;
  double ensemble_window_max_m = 0.6;
  double top_to_base_max_ratio = 0.5;
  double part_split_threshold_pct = 5.0;
  std::vector<OverhangLine> overhang_lines;
  std::map<std::string, double> default_overhang_limits{{"Boompjes", 5.0}, {"Hertekade", 10.0}};
  std::vector<std::string> bike_keywords{"fietsenstalling"};
  double lint_proxy_ratio = 0.05;
  double lint_overlap_ratio = 0.5;
  double lint_outlier_margin_m = 10.0;

  /// Throws Error{InvalidParams}.
  void validate() const;
  /// Limit of a line: explicit, else the default whose label occurs in the line label.
  /// Throws Error{InvalidParams} when neither exists.
  double limit_for(const OverhangLine& line) const;
};

enum class Verdict { Pass, Fail, NeedsReview };
std::string_view to_string(Verdict verdict);

enum class PartRole { Base, Top, Other };
std::string_view to_string(PartRole role);

struct BuildingPart {
  std::size_t first = 0;  // storey index range, inclusive
  std::size_t last = 0;
  double area = 0.0;      // mean footprint area of the part, m2
  PartRole role = PartRole::Other;
};

struct PartSegmentation {
  std::vector<BuildingPart> parts;
  std::optional<std::size_t> base_part() const;
  std::vector<std::size_t> top_storeys() const;
};

/// Groups consecutive storeys by footprint-area change. `ground` selects the base part.
PartSegmentation segment_building_parts(std::span<const double> areas, double threshold_pct, std::size_t ground = 0);
PartSegmentation segment_building_parts(const FootprintSet& footprints, double threshold_pct, std::size_t ground);

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string unit;
};

struct CheckEntry {
  std::string rule;
  Verdict verdict = Verdict::Pass;
  std::vector<Measurement> measured;
  std::vector<std::string> evidence;
  std::vector<std::string> notes;
};

CheckEntry check_max_height(const FederatedModel& model, const RegulationParams& params);

/// Distance between the storey elevation and the lowest point of its elements below it.
std::optional<double> measure_ensemble_thickness(const FederatedModel& model, std::size_t storey);

CheckEntry check_base_height(const FederatedModel& model, const PartSegmentation& segmentation,
                             const RegulationParams& params);

CheckEntry check_top_overlap(const FootprintSet& footprints, const PartSegmentation& segmentation,
                             const RegulationParams& params);

struct OverhangResult {
  OverhangLine line;
  double limit_m = 0.0;
  std::vector<std::pair<std::size_t, double>> per_storey;  // storey index, max distance
  double max_m = 0.0;
  std::optional<std::size_t> max_storey;
  std::optional<ElementKey> max_element;
};

/// Per line, per storey maximum street-side distance of solid element vertices.
/// Empty `target_storeys` means every storey; storeys without geometry are skipped
/// then, but raise Error{NoVertices} when requested explicitly.
std::vector<OverhangResult> overhang_distances(const FederatedModel& model, std::span<const std::size_t> target_storeys,
                                               std::span<const OverhangLine> lines, const RegulationParams& params = {});

CheckEntry check_overhang(const FederatedModel& model, const std::vector<OverhangResult>& results);

struct ParkingCount {
  std::size_t car_count = 0;
  std::vector<ElementKey> car_elements;
  std::vector<std::string> bike_evidence;  // "<key> <space name>"
};

ParkingCount count_parking_spaces(const FederatedModel& model, std::span<const std::string> bike_keywords);

struct LintFinding {
  std::string code;  // L0..L9
  std::string message;
  std::vector<std::string> evidence;
  std::optional<double> value;
};

std::vector<LintFinding> lint_model(const FederatedModel& model, const RegulationParams& params = {});

struct CheckReport {
  std::vector<std::string> models;
  std::vector<std::string> fingerprints;
  FootprintParams footprint_params;
  RegulationParams regulation_params;
  RepairParams repair_params;
  double max_height_m = 0.0;
  std::string ground_storey;
  FootprintSet footprints;
  PartSegmentation segmentation;
  std::vector<OverhangResult> overhang;
  ParkingCount parking;
  std::vector<CheckEntry> entries;
  std::vector<LintFinding> findings;
  std::vector<std::string> warnings;

  /// Fail if any entry fails, else needs-review if any entry needs review, else pass.
  Verdict overall() const;
};

/// Runs every rule. `footprints` may carry a previously computed set for the same params.
CheckReport run_checks(const FederatedModel& model, const FootprintParams& footprint_params,
                       const RegulationParams& regulation_params, const RepairParams& repair_params = {},
                       std::optional<FootprintSet> footprints = std::nullopt);

}  // namespace geobim
