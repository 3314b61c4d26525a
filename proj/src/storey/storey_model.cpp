#include <algorithm>
#include <cmath>
#include <charconv>
#include <future>
#include <limits>
#include <set>
#include <thread>

#include "geobim/error.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

std::string ElementKey::str() const { return "m" + std::to_string(model) + "#" + std::to_string(id); }

std::string_view to_string(RepairAction action) {
  switch (action) {
    case RepairAction::Kept: return "kept";
    case RepairAction::Evicted: return "evicted";
    case RepairAction::Imported: return "imported";
  }
  return "kept";
}

const Element* FederatedModel::element(ElementKey key) const {
  auto it = elements.find(key);
  return it == elements.end() ? nullptr : &it->second;
}

std::vector<const Mesh*> FederatedModel::solid_meshes() const {
  std::vector<const Mesh*> out;
  for (const auto& [key, el] : elements)
    if (el.solid() && el.mesh) out.push_back(&*el.mesh);
  return out;
}

std::size_t nearest_zero_storey(const std::vector<Storey>& storeys) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < storeys.size(); ++i)
    if (std::abs(storeys[i].elevation) < std::abs(storeys[best].elevation)) best = i;
  return best;
}

namespace {

void sort_storeys(std::vector<Storey>& storeys) {
  std::stable_sort(storeys.begin(), storeys.end(), [](const Storey& a, const Storey& b) {
    if (a.elevation != b.elevation) return a.elevation < b.elevation;
    return a.name < b.name;
  });
  for (auto& s : storeys) {
    std::sort(s.element_ids.begin(), s.element_ids.end());
    s.element_ids.erase(std::unique(s.element_ids.begin(), s.element_ids.end()), s.element_ids.end());
    std::sort(s.referenced_ids.begin(), s.referenced_ids.end());
    s.referenced_ids.erase(std::unique(s.referenced_ids.begin(), s.referenced_ids.end()), s.referenced_ids.end());
  }
}

void select_ground(FederatedModel& model) {
  if (model.ground_override) {
    for (std::size_t i = 0; i < model.storeys.size(); ++i)
      if (model.storeys[i].name == *model.ground_override) {
        model.ground_storey = i;
        return;
      }
    throw Error(ErrorCode::UnknownStorey, "ground storey '" + *model.ground_override + "' not found",
                *model.ground_override);
  }
  model.ground_storey = nearest_zero_storey(model.storeys);
}

void tessellate_all(FederatedModel& model, const TessellationOptions& options) {
  std::vector<Element*> todo;
  for (auto& [key, el] : model.elements) todo.push_back(&el);
  const std::size_t workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Element& el = *todo[i];
      const auto& graph = *model.graphs[el.key.model];
      try {
        el.mesh = tessellate(graph, el.key.id, options);
        el.mesh->source_element = el.key.id;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unsupported) throw;
        el.unsupported = e.detail();
      }
    }
  };
  if (workers == 1 || todo.size() < 64) {
    run(0, todo.size());
    return;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (todo.size() + workers - 1) / workers;
  for (std::size_t b = 0; b < todo.size(); b += chunk)
    jobs.push_back(std::async(std::launch::async, run, b, std::min(todo.size(), b + chunk)));
  for (auto& j : jobs) j.get();
}

}  // namespace

FederatedModel federate(std::vector<std::shared_ptr<const IfcGraph>> graphs, const FederateOptions& options,
                        std::vector<std::string> file_names) {
  if (graphs.empty()) throw Error(ErrorCode::EmptyModel, "no models to federate");
  FederatedModel model;
  model.graphs = std::move(graphs);
  model.file_names = std::move(file_names);
  model.file_names.resize(model.graphs.size());
  model.ground_override = options.ground_storey;

  std::vector<Vec3> origins;
  for (const auto& g : model.graphs) origins.push_back(g->georef.site_origin.value_or(Vec3::Zero()));
  for (std::size_t i = 0; i < origins.size(); ++i)
    for (std::size_t j = i + 1; j < origins.size(); ++j)
      model.frame_discrepancy_m = std::max(model.frame_discrepancy_m, (origins[i] - origins[j]).norm());
  if (model.frame_discrepancy_m >= options.frame_tolerance) {
    if (!options.allow_frame_mismatch)
      throw Error(ErrorCode::FrameMismatch,
                  "site origins of the federated files differ by " + std::to_string(model.frame_discrepancy_m) + " m",
                  std::to_string(model.frame_discrepancy_m));
    model.warnings.push_back("federated files are not registered in one frame");
  }

  for (std::uint32_t m = 0; m < model.graphs.size(); ++m) {
    const auto& graph = *model.graphs[m];
    SpatialTree tree = extract_spatial_structure(graph);

    for (EntityId id : product_elements(graph)) {
      const auto& inst = graph.at(id);
      Element el;
      el.key = {m, id};
      el.ifc_class = inst.ifc_class;
      el.name = name_of(graph, inst);
      el.kind = classify(inst.ifc_class);
      model.elements.emplace(el.key, std::move(el));
    }

    for (const auto& node : tree.nodes) {
      for (const auto& ce : node.elements) {
        auto it = model.elements.find({m, ce.id});
        if (it == model.elements.end()) continue;
        if (!ce.referenced && (it->second.container_class.empty() || node.ifc_class == "IFCBUILDINGSTOREY"))
          it->second.container_class = node.ifc_class;
        it->second.multi_storey = it->second.multi_storey || ce.multi_storey;
      }
      if (node.ifc_class != "IFCBUILDINGSTOREY") continue;
      const double elevation = node.elevation.value_or(0.0);
      auto target = std::find_if(model.storeys.begin(), model.storeys.end(), [&](const Storey& s) {
        return s.name == node.name || std::abs(s.elevation - elevation) < options.merge_tolerance;
      });
      if (target == model.storeys.end()) {
        model.storeys.push_back(Storey{node.name, elevation, {}, {}, {}});
        target = std::prev(model.storeys.end());
      }
      for (const auto& ce : node.elements) {
        if (!model.elements.count({m, ce.id})) continue;
        (ce.referenced ? target->referenced_ids : target->element_ids).push_back({m, ce.id});
      }
    }
    for (const auto& w : graph.warnings) model.warnings.push_back("m" + std::to_string(m) + ": " + w);
  }
  if (model.storeys.empty()) throw Error(ErrorCode::NoStoreys, "model has no building storeys");
  sort_storeys(model.storeys);

  std::set<ElementKey> in_storey;
  for (const auto& s : model.storeys) in_storey.insert(s.element_ids.begin(), s.element_ids.end());
  for (const auto& [key, el] : model.elements)
    if (!in_storey.count(key)) model.unassigned.push_back(key);

  tessellate_all(model, options.tessellation);
  for (const auto& [key, el] : model.elements)
    if (!el.unsupported.empty())
      model.warnings.push_back("element " + key.str() + " (" + el.ifc_class + ") has unsupported geometry: " + el.unsupported);
  select_ground(model);
  return model;
}

namespace {

struct Interval {
  double lo, hi;
};

/// Storey index whose buffered interval starts at or below z.
std::size_t storey_for(const std::vector<Storey>& storeys, double z, double buffer) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < storeys.size(); ++i)
    if (storeys[i].elevation - buffer <= z) j = i;
  return j;
}

}  // namespace

FederatedModel repair_storeys(FederatedModel model, const RepairParams& params) {
  auto& storeys = model.storeys;
  if (storeys.empty()) return model;
  const double buffer = params.elev_buffer;

  auto z_range = [&](ElementKey k) -> std::optional<Interval> {
    const auto* el = model.element(k);
    if (!el || !el->mesh || el->mesh->vertices.empty()) return std::nullopt;
    Box3 b = el->mesh->bbox();
    return Interval{b.min().z(), b.max().z()};
  };

  // (b) dissolve phantom storeys, unless that would leave nothing.
  if (params.min_elements > 0) {
    std::vector<bool> weak(storeys.size());
    std::size_t strong = 0;
    for (std::size_t i = 0; i < storeys.size(); ++i) {
      weak[i] = storeys[i].element_ids.size() < params.min_elements;
      strong += weak[i] ? 0 : 1;
    }
    if (strong > 0 && strong < storeys.size()) {
      std::vector<Storey> kept;
      std::vector<std::pair<ElementKey, std::string>> orphans;
      for (std::size_t i = 0; i < storeys.size(); ++i) {
        if (!weak[i]) {
          kept.push_back(std::move(storeys[i]));
          continue;
        }
        model.dissolved_storeys.push_back(storeys[i].name);
        for (auto k : storeys[i].element_ids) orphans.emplace_back(k, storeys[i].name);
        for (auto k : storeys[i].referenced_ids) orphans.emplace_back(k, "");
      }
      storeys = std::move(kept);
      for (const auto& [k, from] : orphans) {
        auto zr = z_range(k);
        double c = zr ? (zr->lo + zr->hi) / 2 : storeys.front().elevation;
        auto& target = storeys[storey_for(storeys, c, buffer)];
        if (from.empty()) {
          target.referenced_ids.push_back(k);
          continue;
        }
        target.element_ids.push_back(k);
        target.repair_notes.push_back({k, RepairAction::Imported,
                                       "storey '" + from + "' dissolved (fewer than " +
                                           std::to_string(params.min_elements) + " elements)"});
      }
      sort_storeys(storeys);
    }
  }

  const std::size_t n = storeys.size();
  auto upper = [&](std::size_t i) {
    return i + 1 < n ? storeys[i + 1].elevation : std::numeric_limits<double>::infinity();
  };
  auto span_count = [&](const Interval& zr) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double overlap = std::min(zr.hi, upper(j)) - std::max(zr.lo, storeys[j].elevation);
      if (overlap > buffer) ++count;
    }
    return count;
  };

  // Authored membership; elements claimed by several storeys are resolved below.
  std::map<ElementKey, std::vector<std::size_t>> owners;
  for (std::size_t i = 0; i < n; ++i)
    for (auto k : storeys[i].element_ids) owners[k].push_back(i);

  std::vector<std::vector<ElementKey>> members(n);
  std::vector<std::vector<RepairNote>> notes(n);
  for (const auto& [k, claim] : owners) {
    auto zr = z_range(k);
    std::size_t home = claim.front();
    if (!zr) {
      members[home].push_back(k);
      for (std::size_t c = 1; c < claim.size(); ++c)
        notes[claim[c]].push_back({k, RepairAction::Evicted, "contained in several storeys; kept in '" + storeys[home].name + "'"});
      continue;
    }
    const double centroid = (zr->lo + zr->hi) / 2;
    if (claim.size() > 1) {
      for (auto c : claim)
        if (centroid >= storeys[c].elevation - buffer && centroid <= upper(c) + buffer) {
          home = c;
          break;
        }
      for (auto c : claim)
        if (c != home)
          notes[c].push_back({k, RepairAction::Evicted, "contained in several storeys; kept in '" + storeys[home].name + "'"});
    }
    if (span_count(*zr) >= 2) {
      model.elements.at(k).multi_span = true;
      members[home].push_back(k);
      notes[home].push_back({k, RepairAction::Kept, "multi-span element spans several storey intervals"});
      continue;
    }
    if (centroid < storeys[home].elevation - buffer || centroid > upper(home) + buffer) {
      std::size_t target = storey_for(storeys, centroid, buffer);
      if (target != home) {
        notes[home].push_back({k, RepairAction::Evicted,
                               "vertical centroid " + std::to_string(centroid) + " m outside storey interval; moved to '" +
                                   storeys[target].name + "'"});
        notes[target].push_back({k, RepairAction::Imported, "vertical centroid within interval; moved from '" +
                                                                storeys[home].name + "'"});
        home = target;
      }
    }
    members[home].push_back(k);
  }
  for (std::size_t i = 0; i < n; ++i) {
    storeys[i].element_ids = std::move(members[i]);
    storeys[i].repair_notes.insert(storeys[i].repair_notes.end(), notes[i].begin(), notes[i].end());
  }
  sort_storeys(storeys);
  select_ground(model);
  return model;
}

double max_height(const FederatedModel& model) {
  auto meshes = model.solid_meshes();
  double top = -std::numeric_limits<double>::infinity();
  for (const auto* m : meshes)
    for (const auto& v : m->vertices) top = std::max(top, v.z());
  if (!std::isfinite(top) || model.storeys.empty()) throw Error(ErrorCode::EmptyModel, "model has no geometry");
  return top - model.storeys[model.ground_storey].elevation;
}

std::size_t find_storey(const FederatedModel& model, std::string_view reference) {
  if (reference == "ground") return model.ground_storey;
  for (std::size_t i = 0; i < model.storeys.size(); ++i)
    if (model.storeys[i].name == reference) return i;
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(reference.data(), reference.data() + reference.size(), index);
  if (ec == std::errc{} && ptr == reference.data() + reference.size() && index < model.storeys.size()) return index;
  throw Error(ErrorCode::UnknownStorey, "unknown storey '" + std::string(reference) + "'", std::string(reference));
}

}  // namespace geobim
