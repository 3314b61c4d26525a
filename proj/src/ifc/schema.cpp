#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "geobim/ifc.hpp"

namespace geobim {

namespace {

using Names = std::vector<std::string_view>;

Names concat(Names a, const Names& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const Names kRoot{"GlobalId", "OwnerHistory", "Name", "Description"};
const Names kObject = concat(kRoot, {"ObjectType"});
const Names kProduct = concat(kObject, {"ObjectPlacement", "Representation"});
const Names kElement = concat(kProduct, {"Tag"});
const Names kSpatial = concat(kProduct, {"LongName", "CompositionType"});

// Element classes whose leading attributes follow the IfcElement layout.
constexpr std::array kElementClasses = {
    "IFCWALL", "IFCWALLSTANDARDCASE", "IFCWALLELEMENTEDCASE", "IFCSLAB", "IFCSLABSTANDARDCASE",
    "IFCCOLUMN", "IFCCOLUMNSTANDARDCASE", "IFCBEAM", "IFCBEAMSTANDARDCASE", "IFCMEMBER",
    "IFCPLATE", "IFCCURTAINWALL", "IFCROOF", "IFCSTAIR", "IFCSTAIRFLIGHT", "IFCRAMP",
    "IFCRAMPFLIGHT", "IFCRAILING", "IFCCOVERING", "IFCDOOR", "IFCWINDOW", "IFCFOOTING",
    "IFCPILE", "IFCCHIMNEY", "IFCBUILDINGELEMENTPROXY", "IFCBUILDINGELEMENTPART",
    "IFCOPENINGELEMENT", "IFCFURNISHINGELEMENT", "IFCFURNITURE", "IFCFLOWTERMINAL",
    "IFCFLOWSEGMENT", "IFCFLOWFITTING", "IFCDISTRIBUTIONELEMENT", "IFCTRANSPORTELEMENT",
    "IFCELEMENTASSEMBLY", "IFCVIRTUALELEMENT", "IFCGEOGRAPHICELEMENT"};

using Table = std::unordered_map<std::string_view, Names>;

Table common_table() {
  Table t;
  for (auto cls : kElementClasses) t[cls] = kElement;
  t["IFCPROJECT"] = concat(kObject, {"LongName", "Phase", "RepresentationContexts", "UnitsInContext"});
  t["IFCSITE"] = concat(kSpatial, {"RefLatitude", "RefLongitude", "RefElevation", "LandTitleNumber", "SiteAddress"});
  t["IFCBUILDING"] = concat(kSpatial, {"ElevationOfRefHeight", "ElevationOfTerrain", "BuildingAddress"});
  t["IFCBUILDINGSTOREY"] = concat(kSpatial, {"Elevation"});
  t["IFCRELCONTAINEDINSPATIALSTRUCTURE"] = concat(kRoot, {"RelatedElements", "RelatingStructure"});
  t["IFCRELREFERENCEDINSPATIALSTRUCTURE"] = concat(kRoot, {"RelatedElements", "RelatingStructure"});
  t["IFCRELAGGREGATES"] = concat(kRoot, {"RelatingObject", "RelatedObjects"});
  t["IFCRELDEFINESBYPROPERTIES"] = concat(kRoot, {"RelatedObjects", "RelatingPropertyDefinition"});
  t["IFCPROPERTYSET"] = concat(kRoot, {"HasProperties"});
  t["IFCPROPERTYSINGLEVALUE"] = {"Name", "Description", "NominalValue", "Unit"};
  t["IFCLOCALPLACEMENT"] = {"PlacementRelTo", "RelativePlacement"};
  t["IFCAXIS2PLACEMENT3D"] = {"Location", "Axis", "RefDirection"};
  t["IFCAXIS2PLACEMENT2D"] = {"Location", "RefDirection"};
  t["IFCCARTESIANPOINT"] = {"Coordinates"};
  t["IFCDIRECTION"] = {"DirectionRatios"};
  t["IFCPRODUCTDEFINITIONSHAPE"] = {"Name", "Description", "Representations"};
  t["IFCSHAPEREPRESENTATION"] = {"ContextOfItems", "RepresentationIdentifier", "RepresentationType", "Items"};
  t["IFCGEOMETRICREPRESENTATIONCONTEXT"] = {"ContextIdentifier", "ContextType", "CoordinateSpaceDimension",
                                            "Precision", "WorldCoordinateSystem", "TrueNorth"};
  t["IFCUNITASSIGNMENT"] = {"Units"};
  t["IFCSIUNIT"] = {"Dimensions", "UnitType", "Prefix", "Name"};
  t["IFCCONVERSIONBASEDUNIT"] = {"Dimensions", "UnitType", "Name", "ConversionFactor"};
  t["IFCMEASUREWITHUNIT"] = {"ValueComponent", "UnitComponent"};
  t["IFCEXTRUDEDAREASOLID"] = {"SweptArea", "Position", "ExtrudedDirection", "Depth"};
  t["IFCRECTANGLEPROFILEDEF"] = {"ProfileType", "ProfileName", "Position", "XDim", "YDim"};
  t["IFCCIRCLEPROFILEDEF"] = {"ProfileType", "ProfileName", "Position", "Radius"};
  t["IFCARBITRARYCLOSEDPROFILEDEF"] = {"ProfileType", "ProfileName", "OuterCurve"};
  t["IFCARBITRARYPROFILEDEFWITHVOIDS"] = {"ProfileType", "ProfileName", "OuterCurve", "InnerCurves"};
  t["IFCPOLYLINE"] = {"Points"};
  t["IFCFACETEDBREP"] = {"Outer"};
  t["IFCCLOSEDSHELL"] = {"CfsFaces"};
  t["IFCOPENSHELL"] = {"CfsFaces"};
  t["IFCFACE"] = {"Bounds"};
  t["IFCFACEBOUND"] = {"Bound", "Orientation"};
  t["IFCFACEOUTERBOUND"] = {"Bound", "Orientation"};
  t["IFCPOLYLOOP"] = {"Polygon"};
  t["IFCSHELLBASEDSURFACEMODEL"] = {"SbsmBoundary"};
  t["IFCMAPPEDITEM"] = {"MappingSource", "MappingTarget"};
  t["IFCREPRESENTATIONMAP"] = {"MappingOrigin", "MappedRepresentation"};
  t["IFCCARTESIANTRANSFORMATIONOPERATOR3D"] = {"Axis1", "Axis2", "LocalOrigin", "Scale", "Axis3"};
  t["IFCCARTESIANTRANSFORMATIONOPERATOR3DNONUNIFORM"] = {"Axis1", "Axis2", "LocalOrigin", "Scale",
                                                         "Axis3", "Scale2", "Scale3"};
  t["IFCBOOLEANCLIPPINGRESULT"] = {"Operator", "FirstOperand", "SecondOperand"};
  t["IFCBOOLEANRESULT"] = {"Operator", "FirstOperand", "SecondOperand"};
  return t;
}

const Table& table_for(Schema schema) {
  static const Table ifc2x3 = [] {
    Table t = common_table();
    t["IFCSPACE"] = concat(kSpatial, {"InteriorOrExteriorSpace", "ElevationWithFlooring"});
    return t;
  }();
  static const Table ifc4 = [] {
    Table t = common_table();
    t["IFCSPACE"] = concat(kSpatial, {"PredefinedType", "ElevationWithFlooring"});
    t["IFCINDEXEDPOLYCURVE"] = {"Points", "Segments", "SelfIntersect"};
    t["IFCCARTESIANPOINTLIST2D"] = {"CoordList"};
    t["IFCCARTESIANPOINTLIST3D"] = {"CoordList"};
    t["IFCTRIANGULATEDFACESET"] = {"Coordinates", "Normals", "Closed", "CoordIndex", "PnIndex"};
    t["IFCPOLYGONALFACESET"] = {"Coordinates", "Closed", "Faces", "PnIndex"};
    t["IFCINDEXEDPOLYGONALFACE"] = {"CoordIndex"};
    t["IFCINDEXEDPOLYGONALFACEWITHVOIDS"] = {"CoordIndex", "InnerCoordIndices"};
    t["IFCMAPCONVERSION"] = {"SourceCRS", "TargetCRS", "Eastings", "Northings", "OrthogonalHeight",
                             "XAxisAbscissa", "XAxisOrdinate", "Scale"};
    return t;
  }();
  return schema == Schema::Ifc2x3 ? ifc2x3 : ifc4;
}

}  // namespace

Schema schema_of(const IfcGraph& graph) {
  if (graph.schema_id == "IFC2X3") return Schema::Ifc2x3;
  if (graph.schema_id.rfind("IFC4", 0) == 0) return Schema::Ifc4;
  return Schema::Other;
}

std::optional<std::size_t> attribute_index(Schema schema, std::string_view ifc_class,
                                           std::string_view attribute) {
  // Unknown schemas are read with the IFC4 map (best effort).
  const Table& table = table_for(schema == Schema::Other ? Schema::Ifc4 : schema);
  auto it = table.find(ifc_class);
  if (it == table.end()) return std::nullopt;
  auto pos = std::find(it->second.begin(), it->second.end(), attribute);
  if (pos == it->second.end()) return std::nullopt;
  return static_cast<std::size_t>(pos - it->second.begin());
}

const StepValue& attribute(const IfcGraph& graph, const EntityInstance& inst,
                           std::string_view attr) {
  static const StepValue unset{};
  auto idx = attribute_index(schema_of(graph), inst.ifc_class, attr);
  if (!idx) return unset;
  return inst.attr(*idx);
}

const EntityInstance* follow(const IfcGraph& graph, const EntityInstance& inst,
                             std::string_view attr) {
  auto id = attribute(graph, inst, attr).ref();
  return id ? graph.find(*id) : nullptr;
}

std::string name_of(const IfcGraph& graph, const EntityInstance& inst) {
  if (auto n = attribute(graph, inst, "Name").text()) return *n;
  // Positional fallback for rooted classes outside the subset map.
  if (auto n = inst.attr(2).text()) return *n;
  return {};
}

ElementKind classify(std::string_view cls) {
  if (is_spatial_structure(cls)) return ElementKind::Spatial;
  if (cls == "IFCSPACE") return ElementKind::Space;
  if (cls == "IFCOPENINGELEMENT" || cls == "IFCOPENINGSTANDARDCASE") return ElementKind::Opening;
  if (cls == "IFCFURNISHINGELEMENT" || cls == "IFCFURNITURE" || cls == "IFCSYSTEMFURNITUREELEMENT")
    return ElementKind::Furniture;
  if (cls == "IFCBUILDINGELEMENTPROXY") return ElementKind::Proxy;
  if (cls == "IFCANNOTATION" || cls == "IFCGRID") return ElementKind::Other;
  return ElementKind::Building;
}

bool is_spatial_structure(std::string_view cls) {
  return cls == "IFCSITE" || cls == "IFCBUILDING" || cls == "IFCBUILDINGSTOREY" ||
         cls == "IFCPROJECT" || cls == "IFCEXTERNALSPATIALELEMENT";
}

std::vector<EntityId> product_elements(const IfcGraph& graph) {
  std::vector<EntityId> out;
  for (const auto& [id, inst] : graph.instances) {
    if (is_spatial_structure(inst.ifc_class) || inst.attrs.size() < 7) continue;
    auto placement = inst.attr(5).ref();
    auto shape = inst.attr(6).ref();
    if (!placement || !shape) continue;
    const auto* p = graph.find(*placement);
    const auto* s = graph.find(*shape);
    if (p && s && p->ifc_class == "IFCLOCALPLACEMENT" && s->ifc_class == "IFCPRODUCTDEFINITIONSHAPE")
      out.push_back(id);
  }
  return out;
}

}  // namespace geobim
