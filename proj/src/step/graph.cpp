#include <algorithm>
#include <cctype>

#include "geobim/error.hpp"
#include "geobim/step.hpp"

namespace geobim {

namespace {
const StepValue& unwrap(const StepValue& v) {
  if (auto* t = std::get_if<TypedValue>(&v.value); t && t->args.size() == 1) return unwrap(t->args[0]);
  return v;
}
}  // namespace

std::optional<EntityId> StepValue::ref() const {
  if (auto* r = std::get_if<EntityRef>(&value)) return r->id;
  return std::nullopt;
}

std::optional<double> StepValue::number() const {
  const auto& v = unwrap(*this);
  if (auto* d = std::get_if<double>(&v.value)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v.value)) return static_cast<double>(*i);
  return std::nullopt;
}

std::optional<std::string> StepValue::text() const {
  const auto& v = unwrap(*this);
  if (auto* s = std::get_if<std::string>(&v.value)) return *s;
  return std::nullopt;
}

std::optional<std::string> StepValue::enumeration() const {
  const auto& v = unwrap(*this);
  if (auto* e = std::get_if<EnumToken>(&v.value)) return e->name;
  return std::nullopt;
}

std::vector<EntityId> StepValue::ref_list() const {
  std::vector<EntityId> ids;
  if (auto* l = list())
    for (const auto& item : *l)
      if (auto r = item.ref()) ids.push_back(*r);
  return ids;
}

std::vector<double> StepValue::number_list() const {
  std::vector<double> out;
  if (auto* l = list())
    for (const auto& item : *l)
      if (auto n = item.number()) out.push_back(*n);
  return out;
}

const StepValue& EntityInstance::attr(std::size_t i) const {
  static const StepValue unset{};
  return i < attrs.size() ? attrs[i] : unset;
}

const EntityInstance* IfcGraph::find(EntityId id) const {
  auto it = instances.find(id);
  return it == instances.end() ? nullptr : &it->second;
}

const EntityInstance& IfcGraph::at(EntityId id) const {
  if (auto* inst = find(id)) return *inst;
  throw Error(ErrorCode::DanglingReference, "no instance #" + std::to_string(id), std::to_string(id));
}

std::vector<const EntityInstance*> IfcGraph::of_class(std::string_view ifc_class) const {
  std::string key(ifc_class);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  std::vector<const EntityInstance*> out;
  if (auto it = by_class_.find(key); it != by_class_.end())
    for (EntityId id : it->second) out.push_back(&instances.at(id));
  return out;
}

void IfcGraph::reindex() {
  by_class_.clear();
  for (const auto& [id, inst] : instances) by_class_[inst.ifc_class].push_back(id);
}

}  // namespace geobim
