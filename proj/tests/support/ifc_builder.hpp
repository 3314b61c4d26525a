#pragma once

// Writes small IFC files for tests and fixtures. Coordinates passed in are site-local
// meters; the builder scales them into file units and routes every element through a
// site -> building -> storey -> element placement chain.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fixture {

struct BuilderOptions {
  std::string schema = "IFC4";
  double meters_per_unit = 1.0;  // 0.001 for millimeter files
  bool declare_length_unit = true;
  std::optional<std::pair<double, double>> lat_long;  // degrees
  Eigen::Vector3d site_origin = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector2d> true_north;
  Eigen::Vector3d wcs_origin = Eigen::Vector3d::Zero();
  bool map_conversion = false;
  std::string project_name = "Fixture";
};

class IfcBuilder {
 public:
  explicit IfcBuilder(BuilderOptions options = {});

  int storey(const std::string& name, double elevation);
  int site() const { return site_; }
  int building() const { return building_; }

  /// Axis-aligned box [x0,x0+dx] x [y0,y0+dy] x [z0,z0+dz] as an extruded rectangle.
  /// `container` is a storey, the site or the building id.
  int box(int container, const std::string& cls, const std::string& name, double x0, double y0, double z0,
          double dx, double dy, double dz);
  /// Four walls whose outer faces lie on the rectangle, plus a floor slab of `slab` thickness.
  void shell(int storey, double x0, double y0, double w, double d, double z0, double h, double thickness = 0.3,
             double slab = 0.2);
  /// Space aggregated under the storey.
  int space(int storey, const std::string& name, double x0, double y0, double z0, double dx, double dy, double dz);
  /// Vertical cylinder from a circle profile.
  int cylinder(int container, const std::string& name, double cx, double cy, double z0, double radius, double h);
  /// Extruded L-shaped polyline profile (outer corner at x0,y0).
  int l_prism(int container, const std::string& name, double x0, double y0, double z0, double w, double d,
              double notch_w, double notch_d, double h);
  /// Tetrahedron as an IFC4 triangulated face set.
  int triangulated_box(int container, const std::string& name, double x0, double y0, double z0, double dx,
                       double dy, double dz);
  /// Box as an IFC4 polygonal face set with quad faces.
  int polygonal_box(int container, const std::string& name, double x0, double y0, double z0, double dx,
                    double dy, double dz);
  /// Box as a faceted brep.
  int brep_box(int container, const std::string& name, double x0, double y0, double z0, double dx, double dy,
               double dz);
  /// Mapped item instancing a unit-origin box shape at (x0,y0,z0).
  int mapped_box(int container, const std::string& name, double x0, double y0, double z0, double dx, double dy,
                 double dz);
  /// Box clipped by a half space (the clipping operand is ignored by consumers that approximate).
  int clipped_box(int container, const std::string& name, double x0, double y0, double z0, double dx, double dy,
                  double dz);
  /// Element whose representation is a curve only (unsupported for meshing).
  int curve_only(int container, const std::string& name);

  void property(int element, const std::string& pset, const std::string& name, const std::string& value);
  /// Additional containment (for duplicate-containment fixtures).
  void also_contain(int element, int storey);
  /// Reference an element from a storey without containment.
  void reference(int element, int storey);
  /// Insert a raw record; returns its id.
  int raw(const std::string& body);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  int add(const std::string& body);
  std::string len(double meters) const;
  std::string point3(double x, double y, double z);
  std::string point2(double x, double y);
  int axis3(double x, double y, double z);
  int placement(int relative_to, double x, double y, double z);
  int product(int container, const std::string& cls, const std::string& name, int placement, int item,
              const std::string& rep_type);
  int rect_solid(double dx, double dy, double dz);

  BuilderOptions opt_;
  std::vector<std::string> records_;
  int context_ = 0, project_ = 0, site_ = 0, building_ = 0, site_plc_ = 0, building_plc_ = 0;
  int z_dir_ = 0;
  std::map<int, int> storey_plc_;
  std::map<int, double> storey_elev_;
  std::map<int, std::vector<int>> contained_;
  std::map<int, std::vector<int>> aggregated_spaces_;
  std::map<int, std::vector<int>> referenced_;
  int guid_ = 0;
};

}  // namespace fixture
