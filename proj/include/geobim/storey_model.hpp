#pragma once

// Federation of discipline files into one building, storey grouping repair and
// global height measurement.

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geobim/geometry.hpp"
#include "geobim/ifc.hpp"
#include "geobim/ifc_geometry.hpp"

namespace geobim {

/// Element identity across federated files: (file index, STEP id).
struct ElementKey {
  std::uint32_t model = 0;
  EntityId id = 0;
  auto operator<=>(const ElementKey&) const = default;
  /// "m<model>#<id>", used as evidence reference in reports.
  std::string str() const;
};

enum class RepairAction { Kept, Evicted, Imported };
std::string_view to_string(RepairAction action);

struct RepairNote {
  ElementKey element;
  RepairAction action = RepairAction::Kept;
  std::string reason;
};

struct Storey {
  std::string name;
  double elevation = 0.0;  // meters
  std::vector<ElementKey> element_ids;     // contained, sorted
  std::vector<ElementKey> referenced_ids;  // IfcRelReferencedInSpatialStructure, sorted
  std::vector<RepairNote> repair_notes;
};

struct Element {
  ElementKey key;
  std::string ifc_class;
  std::string name;
  ElementKind kind = ElementKind::Building;
  std::string container_class;  // IFCBUILDINGSTOREY, IFCSITE, IFCBUILDING or empty
  std::optional<Mesh> mesh;
  std::string unsupported;      // representation kind when tessellation failed
  bool multi_span = false;
  bool multi_storey = false;    // contained by more than one storey as authored

  /// Openings and furniture never count as building mass; spaces are not physical.
  bool solid() const {
    return kind != ElementKind::Space && kind != ElementKind::Opening && kind != ElementKind::Furniture;
  }
};

struct FederatedModel {
  std::vector<std::shared_ptr<const IfcGraph>> graphs;
  std::vector<std::string> file_names;
  std::vector<std::string> fingerprints;  // SHA-256 of each file's bytes, when known
  std::map<ElementKey, Element> elements;
  std::vector<Storey> storeys;  // sorted by elevation, then name
  std::size_t ground_storey = 0;
  std::optional<std::string> ground_override;
  std::vector<ElementKey> unassigned;
  double frame_discrepancy_m = 0.0;
  std::vector<std::string> dissolved_storeys;
  std::vector<std::string> warnings;

  const Element* element(ElementKey key) const;
  /// Meshes of solid elements.
  std::vector<const Mesh*> solid_meshes() const;
  std::size_t element_count() const { return elements.size(); }
};

struct FederateOptions {
  double merge_tolerance = 0.05;  // meters
  double frame_tolerance = 0.01;  // meters
  /// Record the discrepancy instead of throwing FrameMismatch.
  bool allow_frame_mismatch = false;
  std::optional<std::string> ground_storey;
  TessellationOptions tessellation{};
};

/// Throws Error{FrameMismatch | NoStoreys | NoBuilding}.
FederatedModel federate(std::vector<std::shared_ptr<const IfcGraph>> graphs,
                        const FederateOptions& options = {},
                        std::vector<std::string> file_names = {});

enum class SpanPolicy { Keep };

struct RepairParams {
  double elev_buffer = 0.5;
  std::size_t min_elements = 5;
  SpanPolicy span_policy = SpanPolicy::Keep;
};

FederatedModel repair_storeys(FederatedModel model, const RepairParams& params = {});

/// Highest vertex of any solid element minus the ground storey elevation.
/// Throws Error{EmptyModel}.
double max_height(const FederatedModel& model);

/// Resolve a storey reference: "ground", an exact name, or a zero-based index.
/// Throws Error{UnknownStorey}.
std::size_t find_storey(const FederatedModel& model, std::string_view reference);

std::size_t nearest_zero_storey(const std::vector<Storey>& storeys);

}  // namespace geobim
