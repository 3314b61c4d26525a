#pragma once

// Storey footprints: horizontal cut, edge sampling, DBSCAN, k-NN concave hull,
// and overlap against a reference storey.

#include <span>
#include <string>
#include <vector>

#include "geobim/geometry.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

struct FootprintParams {
  double cut_offset = 1.0;      // meters above storey elevation
  double sample_spacing = 0.2;  // meters
  double dbscan_eps = 1.0;      // meters
  std::size_t dbscan_min_pts = 4;
  std::size_t hull_k = 7;

  /// Throws Error{InvalidParams}.
  void validate() const;
  bool operator==(const FootprintParams&) const = default;
};

/// Simple polygon, counter-clockwise, closed implicitly.
struct Polygon2D {
  std::vector<Vec2> ring;
  double area() const { return signed_area(ring); }
};

/// Endpoints plus interior points every `spacing` along each segment.
std::vector<Vec2> sample_segments(std::span<const Segment2D> segments, double spacing);

/// Merge points closer than `tolerance` (grid snapping, first occurrence kept).
std::vector<Vec2> weld_points(std::span<const Vec2> points, double tolerance = 1e-6);

constexpr int kNoise = -1;

/// Cluster labels 0..n-1 in order of discovery, kNoise for noise. Neighbourhoods are
/// inclusive (distance <= eps) and count the point itself.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, std::size_t min_pts);

/// Moreira-Santos k-nearest-neighbour concave hull.
/// Throws Error{DegenerateInput} for fewer than 3 distinct or collinear points.
Polygon2D concave_hull(std::span<const Vec2> points, std::size_t k);

struct StoreyFootprint {
  std::string storey;
  double elevation = 0.0;
  double cut_z = 0.0;
  std::vector<Polygon2D> polygons;
  std::size_t segment_count = 0;
  std::size_t sample_count = 0;
  std::vector<std::string> warnings;

  bool empty() const { return polygons.empty(); }
  /// Area of the union of the polygons.
  double area() const;
};

/// Throws Error{EmptyCut} when no element of the storey crosses the cut plane.
StoreyFootprint storey_footprint(const FederatedModel& model, std::size_t storey,
                                 const FootprintParams& params = {});

/// Union area of a polygon set.
double union_area(std::span<const Polygon2D> polygons);

/// 100 * area(U target n U reference) / area(U reference). Throws Error{ZeroReference}.
double overlap_percentage(std::span<const Polygon2D> target, std::span<const Polygon2D> reference);

struct FootprintSet {
  FootprintParams params;
  std::vector<StoreyFootprint> storeys;  // model storey order
  std::size_t reference_storey = 0;
  std::vector<double> overlaps;          // percent, parallel to storeys; empty before overlap_table
  std::vector<std::string> warnings;
};

/// Footprints of every storey; empty cuts become empty footprints with a warning.
FootprintSet compute_footprints(const FederatedModel& model, const FootprintParams& params = {});

/// Fill overlaps against `reference`. Throws Error{ZeroReference} when the reference is empty.
FootprintSet overlap_table(FootprintSet footprints, std::size_t reference);
FootprintSet overlap_table(const FederatedModel& model, const FootprintParams& params,
                           std::size_t reference);

}  // namespace geobim
