#pragma once

// Placement resolution and tessellation of IFC representation items.

#include <string>
#include <vector>

#include "geobim/geometry.hpp"
#include "geobim/ifc.hpp"

namespace geobim {

/// IfcAxis2Placement2D/3D as a rigid transform (translation scaled to meters).
Transform axis_placement(const IfcGraph& graph, const EntityInstance& placement);

/// Compose an IfcLocalPlacement chain up to its root, child-first.
/// Throws Error{CyclicPlacement}.
Transform resolve_local_placement(const IfcGraph& graph, EntityId placement_id);

/// Absolute placement of a product through its ObjectPlacement chain.
Transform resolve_placement(const IfcGraph& graph, EntityId element_id);

/// World -> model transform: the inverse of the first IfcSite placement (identity if none).
/// Geometry is expressed relative to the site so that georeferenced files keep small
/// coordinates; the site origin is re-applied on export.
Transform model_frame(const IfcGraph& graph);

struct TessellationOptions {
  int circle_segments = 32;
  GeometryTolerances tolerances{};
};

/// Mesh of a product's body representation in the model frame, meters.
/// Throws Error{Unsupported} (detail = representation kind) when nothing could be meshed.
Mesh tessellate(const IfcGraph& graph, EntityId element_id, const TessellationOptions& options = {});

/// Mesh one representation item in its own coordinate system (meters).
Mesh tessellate_item(const IfcGraph& graph, EntityId item_id, const TessellationOptions& options = {});

}  // namespace geobim
