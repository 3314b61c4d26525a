#pragma once

// IFC-level views over a decoded STEP graph: named attribute access for the
// schema subset, units, spatial structure, georeferencing and property sets.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geobim/step.hpp"

namespace geobim {

enum class Schema { Ifc2x3, Ifc4, Other };

Schema schema_of(const IfcGraph& graph);

/// Positional index of a named attribute for the subset classes. Unknown classes or
/// attributes give nullopt; callers then fall back to positional access.
std::optional<std::size_t> attribute_index(Schema schema, std::string_view ifc_class,
                                           std::string_view attribute);

/// Named attribute of an instance; a shared unset value when absent.
const StepValue& attribute(const IfcGraph& graph, const EntityInstance& inst,
                           std::string_view attribute);

/// Follow a reference attribute; nullptr when unset or dangling.
const EntityInstance* follow(const IfcGraph& graph, const EntityInstance& inst,
                             std::string_view attribute);

std::string name_of(const IfcGraph& graph, const EntityInstance& inst);

// ---------------------------------------------------------------------------
// Element classification

enum class ElementKind { Building, Proxy, Space, Opening, Furniture, Spatial, Other };

ElementKind classify(std::string_view ifc_class);
bool is_spatial_structure(std::string_view ifc_class);

/// Products that carry both an ObjectPlacement and a Representation and are not
/// spatial-structure containers (site, building, storey). Spaces and openings included.
std::vector<EntityId> product_elements(const IfcGraph& graph);

// ---------------------------------------------------------------------------
// Units

/// Scale from file length units to meters; stored on the graph.
/// Throws Error{NoLengthUnit}.
double resolve_units(IfcGraph& graph);

// ---------------------------------------------------------------------------
// Spatial structure

struct ContainedElement {
  EntityId id = 0;
  bool referenced = false;    // via IfcRelReferencedInSpatialStructure
  bool multi_storey = false;  // contained in more than one storey
};

struct SpatialNode {
  EntityId id = 0;
  std::string ifc_class;
  std::string name;
  std::optional<double> elevation;  // meters
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::vector<ContainedElement> elements;
};

struct SpatialTree {
  std::vector<SpatialNode> nodes;
  std::vector<std::size_t> roots;
  std::vector<std::size_t> buildings;
  std::vector<std::size_t> storeys;  // authored order (by id)
  std::vector<EntityId> unassigned;  // placed products with no spatial containment

  std::optional<std::size_t> index_of(EntityId id) const;
};

/// Throws Error{NoBuilding}.
SpatialTree extract_spatial_structure(const IfcGraph& graph);

// ---------------------------------------------------------------------------
// Georeferencing

/// Reads IfcSite lat/long and placement, the model context TrueNorth, and IfcMapConversion.
GeoRef extract_georeference(const IfcGraph& graph);
std::string_view to_string(LoGeoRef level);

// ---------------------------------------------------------------------------
// Property sets

/// Element -> {pset name -> {property name -> value text}} for single-value properties.
class PropertyIndex {
 public:
  explicit PropertyIndex(const IfcGraph& graph);
  std::optional<std::string> value(EntityId element, std::string_view pset,
                                   std::string_view property) const;
  /// Property value from any property set on the element.
  std::optional<std::string> any_value(EntityId element, std::string_view property) const;

 private:
  std::map<EntityId, std::map<std::string, std::map<std::string, std::string>>> props_;
};

/// Parse, resolve units and read georeferencing in one step.
IfcGraph load_ifc(std::string_view bytes, ParseOptions options = {});
IfcGraph load_ifc_file(const std::string& path, ParseOptions options = {});

}  // namespace geobim
