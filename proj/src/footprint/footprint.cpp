#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "geobim/error.hpp"
#include "geobim/footprint.hpp"

namespace bg = boost::geometry;

namespace geobim {

void FootprintParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, "invalid footprint parameter: " + what, what); };
  if (!std::isfinite(cut_offset)) bad("cut_offset");
  if (!(sample_spacing > 0) || !std::isfinite(sample_spacing)) bad("sample_spacing");
  if (!(dbscan_eps > 0) || !std::isfinite(dbscan_eps)) bad("dbscan_eps");
  if (dbscan_min_pts < 1) bad("dbscan_min_pts");
  if (hull_k < 3) bad("hull_k");
}

std::vector<Vec2> sample_segments(std::span<const Segment2D> segments, double spacing) {
  if (!(spacing > 0)) throw Error(ErrorCode::InvalidParams, "sample spacing must be positive", "sample_spacing");
  std::vector<Vec2> out;
  for (const auto& s : segments) {
    const double len = s.length();
    out.push_back(s.a);
    const Vec2 dir = len > 0 ? Vec2((s.b - s.a) / len) : Vec2::Zero();
    // A step landing on the far end (within rounding) is the endpoint itself.
    for (int i = 1;; ++i) {
      const double t = i * spacing;
      if (t >= len - 1e-9) break;
      out.push_back(s.a + dir * t);
    }
    if (len > 0) out.push_back(s.b);
  }
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<std::int64_t>()(k.x * 73856093) ^ std::hash<std::int64_t>()(k.y * 19349663);
  }
};

CellKey cell_of(const Vec2& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)), static_cast<std::int64_t>(std::floor(p.y() / size))};
}

}  // namespace

std::vector<Vec2> weld_points(std::span<const Vec2> points, double tolerance) {
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  std::vector<Vec2> out;
  const double tol2 = tolerance * tolerance;
  for (const auto& p : points) {
    const CellKey c = cell_of(p, tolerance);
    bool dup = false;
    for (std::int64_t dx = -1; dx <= 1 && !dup; ++dx)
      for (std::int64_t dy = -1; dy <= 1 && !dup; ++dy) {
        auto it = grid.find({c.x + dx, c.y + dy});
        if (it == grid.end()) continue;
        for (auto idx : it->second)
          if ((out[idx] - p).squaredNorm() <= tol2) {
            dup = true;
            break;
          }
      }
    if (dup) continue;
    grid[c].push_back(out.size());
    out.push_back(p);
  }
  return out;
}

std::vector<int> dbscan(std::span<const Vec2> points, double eps, std::size_t min_pts) {
  const std::size_t n = points.size();
  std::vector<int> labels(n, kNoise);
  if (n == 0) return labels;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(points[i], eps)].push_back(i);
  const double eps2 = eps * eps;

  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    const CellKey c = cell_of(points[i], eps);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({c.x + dx, c.y + dy});
        if (it == grid.end()) continue;
        for (auto j : it->second)
          if ((points[j] - points[i]).squaredNorm() <= eps2) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  };

  std::vector<bool> visited(n, false);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (visited[i]) continue;
    visited[i] = true;
    auto seeds = neighbours(i);
    if (seeds.size() < min_pts) continue;
    labels[i] = cluster;
    for (std::size_t q = 0; q < seeds.size(); ++q) {
      const std::size_t j = seeds[q];
      if (labels[j] == kNoise) labels[j] = cluster;
      if (visited[j]) continue;
      visited[j] = true;
      auto more = neighbours(j);
      if (more.size() >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  return labels;
}

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double normalise_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

/// Inside or within `tol` of the boundary.
bool covered(const std::vector<Vec2>& ring, const Vec2& p, double tol) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if (point_segment_distance(p, a, b) <= tol) return true;
    if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
      inside = !inside;
  }
  return inside;
}

std::vector<Vec2> monotone_chain(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// One Moreira-Santos pass; nullopt asks the caller to retry with a larger k.
std::optional<std::vector<Vec2>> hull_pass(const std::vector<Vec2>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (pts[i].y() < pts[first].y() || (pts[i].y() == pts[first].y() && pts[i].x() < pts[first].x())) first = i;

  std::vector<bool> used(n, false);
  std::vector<std::size_t> hull{first};
  used[first] = true;
  std::size_t current = first;
  double prev_angle = 0.0;
  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(n);

  for (std::size_t step = 0; step <= n; ++step) {
    if (hull.size() == 3) used[first] = false;  // the start may close the ring from now on

    by_distance.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (!used[i] && i != current) by_distance.emplace_back((pts[i] - pts[current]).squaredNorm(), i);
    const std::size_t kk = std::min(k, by_distance.size());
    if (kk == 0) return std::nullopt;
    std::partial_sort(by_distance.begin(), by_distance.begin() + kk, by_distance.end());

    struct Candidate {
      double angle, dist2;
      std::size_t index;
    };
    std::vector<Candidate> cands;
    for (std::size_t c = 0; c < kk; ++c) {
      const Vec2 d = pts[by_distance[c].second] - pts[current];
      cands.push_back({normalise_angle(std::atan2(d.y(), d.x()) - prev_angle), by_distance[c].first, by_distance[c].second});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.angle != b.angle) return a.angle > b.angle;
      return a.dist2 < b.dist2;
    });

    std::optional<std::size_t> chosen;
    for (const auto& cand : cands) {
      const bool closing = cand.index == first;
      bool crosses = false;
      // Edges (hull[j-1], hull[j]); the last one shares `current`, and the first one
      // shares the start when closing.
      for (std::size_t j = 1; j + 1 < hull.size() && !crosses; ++j) {
        if (closing && j == 1) continue;
        crosses = segments_intersect(pts[current], pts[cand.index], pts[hull[j - 1]], pts[hull[j]]);
      }
      if (!crosses) {
        chosen = cand.index;
        break;
      }
    }
    if (!chosen) return std::nullopt;
    if (*chosen == first) break;

    const Vec2 back = pts[current] - pts[*chosen];
    prev_angle = std::atan2(back.y(), back.x());
    current = *chosen;
    used[current] = true;
    hull.push_back(current);
  }
  if (hull.size() < 3) return std::nullopt;

  std::vector<Vec2> ring;
  for (auto i : hull) ring.push_back(pts[i]);
  for (std::size_t i = 0; i < n; ++i)
    if (!covered(ring, pts[i], 1e-9)) return std::nullopt;
  return ring;
}

}  // namespace

Polygon2D concave_hull(std::span<const Vec2> points, std::size_t k) {
  std::vector<Vec2> pts = weld_points(points, 1e-9);
  if (pts.size() < 3) throw Error(ErrorCode::DegenerateInput, "concave hull needs at least 3 distinct points");
  bool collinear = true;
  for (std::size_t i = 2; i < pts.size() && collinear; ++i)
    collinear = std::abs(orient(pts[0], pts[1], pts[i])) <= 1e-12 * std::max(1.0, (pts[1] - pts[0]).squaredNorm());
  if (collinear) throw Error(ErrorCode::DegenerateInput, "all points are collinear; the hull has zero area");

  Polygon2D poly;
  for (std::size_t kk = std::max<std::size_t>(3, k); kk < pts.size(); ++kk) {
    if (auto ring = hull_pass(pts, kk)) {
      poly.ring = std::move(*ring);
      break;
    }
  }
  if (poly.ring.empty()) poly.ring = monotone_chain(pts);
  if (signed_area(poly.ring) < 0) std::reverse(poly.ring.begin(), poly.ring.end());
  return poly;
}

namespace {

using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;

// Ring without vertices that sit on the line through their neighbours; same area, cheaper overlays.
std::vector<Vec2> without_collinear(const std::vector<Vec2>& ring) {
  std::vector<Vec2> out;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& prev = out.empty() ? ring[n - 1] : out.back();
    const Vec2& next = ring[(i + 1) % n];
    const Vec2 d = next - prev;
    if (std::abs(cross2(d, ring[i] - prev)) > 1e-12 * std::max(1.0, d.squaredNorm())) out.push_back(ring[i]);
  }
  return out.size() >= 3 ? out : ring;
}

BgMulti to_multi(std::span<const Polygon2D> polygons) {
  BgMulti result;
  for (const auto& p : polygons) {
    if (p.ring.size() < 3) continue;
    BgPolygon bp;
    for (const auto& v : without_collinear(p.ring)) bp.outer().emplace_back(v.x(), v.y());
    bp.outer().emplace_back(p.ring.front().x(), p.ring.front().y());
    bg::correct(bp);
    if (result.empty()) {
      result.push_back(std::move(bp));
      continue;
    }
    BgMulti next;
    bg::union_(result, bp, next);
    result = std::move(next);
  }
  return result;
}

double overlap_against(std::span<const Polygon2D> target, const BgMulti& ref, double ref_area) {
  if (!(ref_area > 0)) throw Error(ErrorCode::ZeroReference, "reference footprint has zero area");
  BgMulti inter;
  bg::intersection(to_multi(target), ref, inter);
  return std::clamp(100.0 * bg::area(inter) / ref_area, 0.0, 100.0);
}

}  // namespace

double union_area(std::span<const Polygon2D> polygons) { return bg::area(to_multi(polygons)); }

double StoreyFootprint::area() const { return union_area(polygons); }

double overlap_percentage(std::span<const Polygon2D> target, std::span<const Polygon2D> reference) {
  const BgMulti ref = to_multi(reference);
  return overlap_against(target, ref, bg::area(ref));
}

StoreyFootprint storey_footprint(const FederatedModel& model, std::size_t storey_index, const FootprintParams& params) {
  params.validate();
  if (storey_index >= model.storeys.size())
    throw Error(ErrorCode::UnknownStorey, "storey index out of range", std::to_string(storey_index));
  const Storey& storey = model.storeys[storey_index];
  StoreyFootprint fp;
  fp.storey = storey.name;
  fp.elevation = storey.elevation;
  fp.cut_z = storey.elevation + params.cut_offset;

  std::vector<const Mesh*> meshes;
  for (auto key : storey.element_ids) {
    const Element* el = model.element(key);
    if (el && el->solid() && el->mesh) meshes.push_back(&*el->mesh);
  }
  // Elements spanning several storeys are cut wherever they reach the plane.
  for (const auto& [key, el] : model.elements) {
    if (!el.multi_span || !el.solid() || !el.mesh) continue;
    if (std::binary_search(storey.element_ids.begin(), storey.element_ids.end(), key)) continue;
    meshes.push_back(&*el.mesh);
  }

  std::vector<Segment2D> segments;
  for (const auto* m : meshes) {
    auto s = slice_mesh(*m, fp.cut_z);
    segments.insert(segments.end(), s.begin(), s.end());
  }
  fp.segment_count = segments.size();
  if (segments.empty())
    throw Error(ErrorCode::EmptyCut, "no geometry of storey '" + storey.name + "' crosses z = " + std::to_string(fp.cut_z),
                storey.name);

  const auto samples = weld_points(sample_segments(segments, params.sample_spacing), 1e-6);
  fp.sample_count = samples.size();
  const auto labels = dbscan(samples, params.dbscan_eps, params.dbscan_min_pts);
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<Vec2>> groups(clusters);
  std::size_t noise = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (labels[i] == kNoise) ++noise;
    else groups[labels[i]].push_back(samples[i]);
  }
  if (noise > 0) fp.warnings.push_back(std::to_string(noise) + " sample points discarded as noise");
  for (std::size_t c = 0; c < groups.size(); ++c) {
    try {
      fp.polygons.push_back(concave_hull(groups[c], params.hull_k));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      fp.warnings.push_back("cluster " + std::to_string(c) + " discarded: " + e.what());
    }
  }
  return fp;
}

FootprintSet compute_footprints(const FederatedModel& model, const FootprintParams& params) {
  params.validate();
  FootprintSet set;
  set.params = params;
  std::vector<std::future<StoreyFootprint>> jobs;
  for (std::size_t i = 0; i < model.storeys.size(); ++i)
    jobs.push_back(std::async(std::launch::async, [&model, &params, i] {
      try {
        return storey_footprint(model, i, params);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyCut) throw;
        StoreyFootprint fp;
        fp.storey = model.storeys[i].name;
        fp.elevation = model.storeys[i].elevation;
        fp.cut_z = fp.elevation + params.cut_offset;
        fp.warnings.push_back(e.what());
        return fp;
      }
    }));
  for (auto& j : jobs) set.storeys.push_back(j.get());
  for (const auto& fp : set.storeys)
    for (const auto& w : fp.warnings) set.warnings.push_back("storey '" + fp.storey + "': " + w);
  return set;
}

FootprintSet overlap_table(FootprintSet footprints, std::size_t reference) {
  if (reference >= footprints.storeys.size())
    throw Error(ErrorCode::UnknownStorey, "reference storey index out of range", std::to_string(reference));
  footprints.reference_storey = reference;
  footprints.overlaps.clear();
  const auto& ref = footprints.storeys[reference];
  if (ref.empty())
    throw Error(ErrorCode::ZeroReference, "reference storey '" + ref.storey + "' has an empty footprint", ref.storey);
  const BgMulti ref_multi = to_multi(ref.polygons);
  const double ref_area = bg::area(ref_multi);
  for (const auto& fp : footprints.storeys) {
    if (fp.empty()) {
      footprints.overlaps.push_back(0.0);
      footprints.warnings.push_back("storey '" + fp.storey + "' has an empty footprint; overlap reported as 0");
      continue;
    }
    footprints.overlaps.push_back(overlap_against(fp.polygons, ref_multi, ref_area));
  }
  return footprints;
}

FootprintSet overlap_table(const FederatedModel& model, const FootprintParams& params, std::size_t reference) {
  return overlap_table(compute_footprints(model, params), reference);
}

}  // namespace geobim
