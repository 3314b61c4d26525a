#pragma once

// ISO 10303-21 (STEP physical file) decoding into an id -> instance graph.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace geobim {

using EntityId = std::uint64_t;

struct Unset {
  friend bool operator==(const Unset&, const Unset&) = default;
};
struct Derived {
  friend bool operator==(const Derived&, const Derived&) = default;
};
struct EntityRef {
  EntityId id = 0;
  friend bool operator==(const EntityRef&, const EntityRef&) = default;
};
/// `.NAME.` token, stored without the dots.
struct EnumToken {
  std::string name;
  friend bool operator==(const EnumToken&, const EnumToken&) = default;
};
/// `"0ABC"` binary literal, kept as its hex text.
struct Binary {
  std::string hex;
  friend bool operator==(const Binary&, const Binary&) = default;
};

struct StepValue;

/// `IFCLENGTHMEASURE(0.3)` style select-wrapped value.
struct TypedValue {
  std::string type;
  std::vector<StepValue> args;
  friend bool operator==(const TypedValue&, const TypedValue&) = default;
};

struct StepValue {
  using List = std::vector<StepValue>;
  using Variant = std::variant<Unset, Derived, std::int64_t, double, std::string, EnumToken,
                               EntityRef, TypedValue, List, Binary>;
  Variant value;

  StepValue() = default;
  template <class T>
    requires std::is_constructible_v<Variant, T&&> && (!std::is_same_v<std::decay_t<T>, StepValue>)
  StepValue(T&& v) : value(std::forward<T>(v)) {}

  bool is_unset() const { return std::holds_alternative<Unset>(value); }
  bool is_ref() const { return std::holds_alternative<EntityRef>(value); }
  bool is_list() const { return std::holds_alternative<List>(value); }

  std::optional<EntityId> ref() const;
  /// Integer or real, looking through a TypedValue wrapper.
  std::optional<double> number() const;
  /// String, looking through a TypedValue wrapper.
  std::optional<std::string> text() const;
  std::optional<std::string> enumeration() const;
  const List* list() const { return std::get_if<List>(&value); }
  /// Entity ids held directly in a list attribute (non-ref items skipped).
  std::vector<EntityId> ref_list() const;
  std::vector<double> number_list() const;

  friend bool operator==(const StepValue&, const StepValue&) = default;
};

struct EntityInstance {
  EntityId id = 0;
  /// Upper-case class name. Complex (multi-leaf) records use "(COMPLEX)" and carry one
  /// TypedValue attribute per partial record.
  std::string ifc_class;
  std::vector<StepValue> attrs;

  const StepValue& attr(std::size_t i) const;
  friend bool operator==(const EntityInstance&, const EntityInstance&) = default;
};

enum class LoGeoRef { None = 0, L20 = 20, L30 = 30, L40 = 40, L50 = 50 };

struct GeoRef {
  std::optional<double> ref_latitude;   // decimal degrees
  std::optional<double> ref_longitude;  // decimal degrees
  std::optional<Eigen::Vector3d> site_origin;
  std::optional<Eigen::Vector2d> true_north;  // unit length
  LoGeoRef logeoref_level = LoGeoRef::None;
};

/// Decoded instance graph of one file. Treat as immutable once loading finished.
struct IfcGraph {
  std::map<EntityId, EntityInstance> instances;
  std::string schema_id;
  std::vector<std::string> header_file_name;
  double length_to_meters = 1.0;
  GeoRef georef;
  std::vector<std::string> warnings;

  const EntityInstance* find(EntityId id) const;
  const EntityInstance& at(EntityId id) const;
  /// Instances of one class in id order (class name compared upper-case).
  std::vector<const EntityInstance*> of_class(std::string_view ifc_class) const;

  void reindex();

 private:
  std::unordered_map<std::string, std::vector<EntityId>> by_class_;
};

struct ParseOptions {
  bool strict = false;
};

/// Tokenize a physical file. Throws Error{MissingHeader | SyntaxError | DanglingReference}.
IfcGraph parse_step(std::string_view bytes, ParseOptions options = {});

/// Write the graph back as a physical file (header + DATA section, one record per line).
std::string serialize_step(const IfcGraph& graph);
std::string to_step_text(const StepValue& value);

/// Decode a STEP string literal body (between the quotes).
std::string decode_step_string(std::string_view raw, std::vector<std::string>* warnings = nullptr);
std::string encode_step_string(std::string_view utf8);

}  // namespace geobim
