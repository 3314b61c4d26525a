#pragma once

// Dense geometric primitives: meshes in model meters, horizontal sections, boxes.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "geobim/step.hpp"

namespace geobim {

template <class Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <class Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
/// Rigid placement; rotation block orthonormal, translation in meters.
template <class Scalar>
using RigidTransform = Eigen::Transform<Scalar, 3, Eigen::Isometry>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;
using Transform = RigidTransform<double>;
using Box3 = Eigen::AlignedBox3d;
using Box2 = Eigen::AlignedBox2d;

template <class Derived1, class Derived2>
typename Derived1::Scalar cross2(const Eigen::MatrixBase<Derived1>& a,
                                 const Eigen::MatrixBase<Derived2>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

struct GeometryTolerances {
  double vertex_weld = 1e-6;
  double min_segment = 1e-9;
  double plane_snap = 1e-7;
  double min_triangle_area = 1e-12;
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  EntityId source_element = 0;
  /// Set when the mesh only approximates the authored solid (clipping, voids, arcs).
  bool approximate = false;

  bool empty() const { return triangles.empty(); }
  /// Append `other` mapped through `xf`.
  void append(const Mesh& other, const Eigen::Affine3d& xf = Eigen::Affine3d::Identity());
  /// Weld coincident vertices and drop degenerate triangles.
  void cleanup(const GeometryTolerances& tol = {});
  Box3 bbox() const;
};

Mesh transformed(const Mesh& mesh, const Eigen::Affine3d& xf);

struct Segment2D {
  Vec2 a;
  Vec2 b;
  double length() const { return (b - a).norm(); }
};

/// Intersect a mesh with the horizontal plane at height `z`.
std::vector<Segment2D> slice_mesh(const Mesh& mesh, double z, const GeometryTolerances& tol = {});

/// Throws Error{EmptyModel} when no mesh has vertices.
Box3 model_bbox(std::span<const Mesh> meshes);

/// Triangulate a simple polygon with optional holes (any orientation). Indices refer to
/// the concatenation outer + holes[0] + holes[1] + ...
std::vector<std::array<std::uint32_t, 3>> triangulate_polygon(
    const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes = {});

template <class Scalar>
Scalar signed_area(const std::vector<Vector2<Scalar>>& ring) {
  Scalar a = 0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) a += cross2(ring[i], ring[(i + 1) % n]);
  return a / 2;
}

/// ASCII Wavefront OBJ, one object per mesh.
void write_obj(std::ostream& out, std::span<const Mesh> meshes);

}  // namespace geobim
