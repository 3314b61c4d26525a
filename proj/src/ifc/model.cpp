#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "geobim/error.hpp"
#include "geobim/ifc.hpp"

namespace geobim {

namespace {

double si_prefix(std::string_view prefix) {
  static const std::map<std::string_view, double> prefixes{
      {"EXA", 1e18}, {"PETA", 1e15}, {"TERA", 1e12}, {"GIGA", 1e9},   {"MEGA", 1e6},
      {"KILO", 1e3}, {"HECTO", 1e2}, {"DECA", 1e1},  {"DECI", 1e-1},  {"CENTI", 1e-2},
      {"MILLI", 1e-3}, {"MICRO", 1e-6}, {"NANO", 1e-9}, {"PICO", 1e-12}, {"FEMTO", 1e-15},
      {"ATTO", 1e-18}};
  auto it = prefixes.find(prefix);
  return it == prefixes.end() ? 1.0 : it->second;
}

std::optional<double> length_unit_scale(const IfcGraph& graph, const EntityInstance& unit, int depth = 0) {
  if (depth > 8) return std::nullopt;
  if (unit.ifc_class == "IFCSIUNIT") {
    if (attribute(graph, unit, "Name").enumeration() != "METRE") return std::nullopt;
    auto prefix = attribute(graph, unit, "Prefix").enumeration();
    return prefix ? si_prefix(*prefix) : 1.0;
  }
  if (unit.ifc_class == "IFCCONVERSIONBASEDUNIT") {
    const auto* factor = follow(graph, unit, "ConversionFactor");
    if (!factor) return std::nullopt;
    auto value = attribute(graph, *factor, "ValueComponent").number();
    const auto* base = follow(graph, *factor, "UnitComponent");
    if (!value || !base) return std::nullopt;
    auto base_scale = length_unit_scale(graph, *base, depth + 1);
    if (!base_scale) return std::nullopt;
    return *value * *base_scale;
  }
  return std::nullopt;
}

std::optional<double> storey_elevation(const IfcGraph& graph, const EntityInstance& storey) {
  if (auto e = attribute(graph, storey, "Elevation").number()) return *e * graph.length_to_meters;
  return std::nullopt;
}

}  // namespace

double resolve_units(IfcGraph& graph) {
  for (const auto* project : graph.of_class("IFCPROJECT")) {
    const auto* assignment = follow(graph, *project, "UnitsInContext");
    if (!assignment) continue;
    for (EntityId uid : attribute(graph, *assignment, "Units").ref_list()) {
      const auto* unit = graph.find(uid);
      if (!unit || attribute(graph, *unit, "UnitType").enumeration() != "LENGTHUNIT") continue;
      if (auto scale = length_unit_scale(graph, *unit); scale && *scale > 0) {
        graph.length_to_meters = *scale;
        return *scale;
      }
    }
  }
  throw Error(ErrorCode::NoLengthUnit, "model declares no length unit; it cannot be measured");
}

std::optional<std::size_t> SpatialTree::index_of(EntityId id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

SpatialTree extract_spatial_structure(const IfcGraph& graph) {
  SpatialTree tree;
  std::map<EntityId, std::size_t> index;
  for (const auto& [id, inst] : graph.instances) {
    if (!is_spatial_structure(inst.ifc_class)) continue;
    SpatialNode node;
    node.id = id;
    node.ifc_class = inst.ifc_class;
    node.name = name_of(graph, inst);
    if (inst.ifc_class == "IFCBUILDINGSTOREY") node.elevation = storey_elevation(graph, inst);
    index[id] = tree.nodes.size();
    tree.nodes.push_back(std::move(node));
  }

  for (const auto* rel : graph.of_class("IFCRELAGGREGATES")) {
    auto parent = attribute(graph, *rel, "RelatingObject").ref();
    if (!parent || !index.count(*parent)) continue;
    for (EntityId child : attribute(graph, *rel, "RelatedObjects").ref_list()) {
      auto it = index.find(child);
      if (it == index.end() || tree.nodes[it->second].parent) continue;
      tree.nodes[it->second].parent = index[*parent];
      tree.nodes[index[*parent]].children.push_back(it->second);
    }
  }

  std::set<EntityId> placed;
  std::map<EntityId, int> storey_containments;
  // Spaces decompose storeys through aggregation rather than containment.
  for (const auto* rel : graph.of_class("IFCRELAGGREGATES")) {
    auto parent = attribute(graph, *rel, "RelatingObject").ref();
    if (!parent || !index.count(*parent)) continue;
    for (EntityId child : attribute(graph, *rel, "RelatedObjects").ref_list()) {
      const auto* inst = graph.find(child);
      if (!inst || inst->ifc_class != "IFCSPACE" || placed.count(child)) continue;
      tree.nodes[index[*parent]].elements.push_back({child, false, false});
      placed.insert(child);
    }
  }
  auto attach = [&](std::string_view rel_class, bool referenced) {
    for (const auto* rel : graph.of_class(rel_class)) {
      auto structure = attribute(graph, *rel, "RelatingStructure").ref();
      if (!structure || !index.count(*structure)) continue;
      auto& node = tree.nodes[index[*structure]];
      for (EntityId el : attribute(graph, *rel, "RelatedElements").ref_list()) {
        node.elements.push_back({el, referenced, false});
        placed.insert(el);
        if (!referenced && node.ifc_class == "IFCBUILDINGSTOREY") ++storey_containments[el];
      }
    }
  };
  attach("IFCRELCONTAINEDINSPATIALSTRUCTURE", false);
  attach("IFCRELREFERENCEDINSPATIALSTRUCTURE", true);
  for (auto& node : tree.nodes)
    for (auto& el : node.elements)
      el.multi_storey = storey_containments[el.id] > 1;

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (!node.parent) tree.roots.push_back(i);
    if (node.ifc_class == "IFCBUILDING") tree.buildings.push_back(i);
    if (node.ifc_class == "IFCBUILDINGSTOREY") tree.storeys.push_back(i);
  }
  if (tree.buildings.empty()) throw Error(ErrorCode::NoBuilding, "model has no IfcBuilding");

  for (EntityId id : product_elements(graph))
    if (!placed.count(id)) tree.unassigned.push_back(id);
  return tree;
}

PropertyIndex::PropertyIndex(const IfcGraph& graph) {
  for (const auto* rel : graph.of_class("IFCRELDEFINESBYPROPERTIES")) {
    const auto* pset = follow(graph, *rel, "RelatingPropertyDefinition");
    if (!pset || pset->ifc_class != "IFCPROPERTYSET") continue;
    std::string pset_name = name_of(graph, *pset);
    std::map<std::string, std::string> values;
    for (EntityId pid : attribute(graph, *pset, "HasProperties").ref_list()) {
      const auto* prop = graph.find(pid);
      if (!prop || prop->ifc_class != "IFCPROPERTYSINGLEVALUE") continue;
      auto pname = attribute(graph, *prop, "Name").text();
      const auto& nominal = attribute(graph, *prop, "NominalValue");
      std::string text;
      if (auto t = nominal.text()) text = *t;
      else if (auto n = nominal.number()) text = to_step_text(StepValue(*n));
      else if (auto e = nominal.enumeration()) text = *e;
      if (pname) values[*pname] = text;
    }
    for (EntityId el : attribute(graph, *rel, "RelatedObjects").ref_list())
      for (const auto& [k, v] : values) props_[el][pset_name][k] = v;
  }
}

std::optional<std::string> PropertyIndex::value(EntityId element, std::string_view pset,
                                                std::string_view property) const {
  auto e = props_.find(element);
  if (e == props_.end()) return std::nullopt;
  auto p = e->second.find(std::string(pset));
  if (p == e->second.end()) return std::nullopt;
  auto v = p->second.find(std::string(property));
  if (v == p->second.end()) return std::nullopt;
  return v->second;
}

std::optional<std::string> PropertyIndex::any_value(EntityId element, std::string_view property) const {
  auto e = props_.find(element);
  if (e == props_.end()) return std::nullopt;
  for (const auto& [pset, values] : e->second)
    if (auto v = values.find(std::string(property)); v != values.end()) return v->second;
  return std::nullopt;
}

IfcGraph load_ifc(std::string_view bytes, ParseOptions options) {
  IfcGraph graph = parse_step(bytes, options);
  resolve_units(graph);
  graph.georef = extract_georeference(graph);
  return graph;
}

IfcGraph load_ifc_file(const std::string& path, ParseOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_ifc(ss.str(), options);
}

}  // namespace geobim
