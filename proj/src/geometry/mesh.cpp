#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include "geobim/error.hpp"
#include "geobim/geometry.hpp"

namespace geobim {

namespace {

struct GridKey {
  std::int64_t x, y, z;
  bool operator==(const GridKey&) const = default;
};
struct GridKeyHash {
  std::size_t operator()(const GridKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
    h ^= static_cast<std::size_t>(k.y) * 19349663u;
    h ^= static_cast<std::size_t>(k.z) * 83492791u;
    return h;
  }
};

GridKey key_of(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::llround(p.x() / cell)),
          static_cast<std::int64_t>(std::llround(p.y() / cell)),
          static_cast<std::int64_t>(std::llround(p.z() / cell))};
}

}  // namespace

void Mesh::append(const Mesh& other, const Eigen::Affine3d& xf) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.reserve(vertices.size() + other.vertices.size());
  for (const auto& v : other.vertices) vertices.push_back(xf * v);
  const bool flip = xf.linear().determinant() < 0;
  for (auto t : other.triangles) {
    if (flip) std::swap(t[1], t[2]);
    triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  approximate = approximate || other.approximate;
}

void Mesh::cleanup(const GeometryTolerances& tol) {
  std::unordered_map<GridKey, std::uint32_t, GridKeyHash> index;
  std::vector<Vec3> welded;
  std::vector<std::uint32_t> remap(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    auto [it, inserted] = index.try_emplace(key_of(vertices[i], tol.vertex_weld),
                                            static_cast<std::uint32_t>(welded.size()));
    if (inserted) welded.push_back(vertices[i]);
    remap[i] = it->second;
  }
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(triangles.size());
  for (const auto& t : triangles) {
    std::array<std::uint32_t, 3> r{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    double area = 0.5 * (welded[r[1]] - welded[r[0]]).cross(welded[r[2]] - welded[r[0]]).norm();
    if (area <= tol.min_triangle_area) continue;
    kept.push_back(r);
  }
  // Drop vertices no longer referenced.
  std::vector<std::int64_t> used(welded.size(), -1);
  std::vector<Vec3> compact;
  for (auto& t : kept)
    for (auto& i : t) {
      if (used[i] < 0) {
        used[i] = static_cast<std::int64_t>(compact.size());
        compact.push_back(welded[i]);
      }
      i = static_cast<std::uint32_t>(used[i]);
    }
  vertices = std::move(compact);
  triangles = std::move(kept);
}

Box3 Mesh::bbox() const {
  Box3 box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

Mesh transformed(const Mesh& mesh, const Eigen::Affine3d& xf) {
  Mesh out;
  out.source_element = mesh.source_element;
  out.append(mesh, xf);
  out.approximate = mesh.approximate;
  return out;
}

std::vector<Segment2D> slice_mesh(const Mesh& mesh, double z, const GeometryTolerances& tol) {
  std::vector<Segment2D> raw;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> coplanar_edges;

  std::vector<double> d(mesh.vertices.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = mesh.vertices[i].z() - z;
    if (std::abs(d[i]) < tol.plane_snap) d[i] = 0.0;
  }
  auto xy = [&](std::uint32_t i) { return Vec2(mesh.vertices[i].x(), mesh.vertices[i].y()); };

  for (const auto& t : mesh.triangles) {
    const double d0 = d[t[0]], d1 = d[t[1]], d2 = d[t[2]];
    if (d0 == 0 && d1 == 0 && d2 == 0) {
      for (int e = 0; e < 3; ++e) {
        auto a = t[e], b = t[(e + 1) % 3];
        ++coplanar_edges[{std::min(a, b), std::max(a, b)}];
      }
      continue;
    }
    if ((d0 > 0 && d1 > 0 && d2 > 0) || (d0 < 0 && d1 < 0 && d2 < 0)) continue;
    std::vector<Vec2> pts;
    for (int e = 0; e < 3; ++e) {
      auto i = t[e], j = t[(e + 1) % 3];
      if (d[i] == 0) pts.push_back(xy(i));
      if ((d[i] < 0 && d[j] > 0) || (d[i] > 0 && d[j] < 0)) {
        double s = d[i] / (d[i] - d[j]);
        Vec3 p = mesh.vertices[i] + s * (mesh.vertices[j] - mesh.vertices[i]);
        pts.emplace_back(p.x(), p.y());
      }
    }
    if (pts.size() == 2) raw.push_back({pts[0], pts[1]});
  }
  for (const auto& [edge, count] : coplanar_edges)
    if (count == 1) raw.push_back({xy(edge.first), xy(edge.second)});

  // Same segment produced by neighbouring triangles (edge-on-plane cases) is kept once.
  std::vector<Segment2D> out;
  std::map<std::array<std::int64_t, 4>, bool> seen;
  const double cell = tol.vertex_weld;
  auto q = [cell](double v) { return static_cast<std::int64_t>(std::llround(v / cell)); };
  for (const auto& s : raw) {
    if (s.length() < tol.min_segment) continue;
    std::array<std::int64_t, 4> k1{q(s.a.x()), q(s.a.y()), q(s.b.x()), q(s.b.y())};
    std::array<std::int64_t, 4> k2{k1[2], k1[3], k1[0], k1[1]};
    auto key = std::min(k1, k2);
    if (seen.emplace(key, true).second) out.push_back(s);
  }
  return out;
}

Box3 model_bbox(std::span<const Mesh> meshes) {
  Box3 box;
  for (const auto& m : meshes)
    for (const auto& v : m.vertices) box.extend(v);
  if (box.isEmpty()) throw Error(ErrorCode::EmptyModel, "model has no geometry");
  return box;
}

namespace {

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double eps = 1e-14;
  double c1 = cross2(b - a, p - a), c2 = cross2(c - b, p - b), c3 = cross2(a - c, p - c);
  return c1 > eps && c2 > eps && c3 > eps;
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  double d1 = cross2(q2 - q1, p1 - q1), d2 = cross2(q2 - q1, p2 - q1);
  double d3 = cross2(p2 - p1, q1 - p1), d4 = cross2(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// q lies on the open segment (a, b).
bool on_open_segment(const Vec2& q, const Vec2& a, const Vec2& b) {
  if (q == a || q == b) return false;
  const Vec2 d = b - a;
  if (std::abs(cross2(d, q - a)) > 1e-12 * d.squaredNorm()) return false;
  const double t = d.dot(q - a);
  return t > 0 && t < d.squaredNorm();
}

// Bridge p1-p2 is blocked by edge q1-q2 when they cross or when either passes through a vertex of the other.
bool bridge_blocked(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  return segments_cross(p1, p2, q1, q2) || on_open_segment(q1, p1, p2) || on_open_segment(q2, p1, p2) ||
         on_open_segment(p1, q1, q2) || on_open_segment(p2, q1, q2);
}

double ring_area(const std::vector<Vec2>& pts, const std::vector<std::uint32_t>& ring) {
  double a = 0;
  for (std::size_t i = 0; i < ring.size(); ++i)
    a += cross2(pts[ring[i]], pts[ring[(i + 1) % ring.size()]]);
  return a / 2;
}

}  // namespace

std::vector<std::array<std::uint32_t, 3>> triangulate_polygon(
    const std::vector<Vec2>& outer, const std::vector<std::vector<Vec2>>& holes) {
  std::vector<Vec2> pts = outer;
  std::vector<std::uint32_t> poly(outer.size());
  for (std::uint32_t i = 0; i < poly.size(); ++i) poly[i] = i;
  if (ring_area(pts, poly) < 0) std::reverse(poly.begin(), poly.end());

  std::vector<std::vector<std::uint32_t>> hole_rings;
  for (const auto& h : holes) {
    std::vector<std::uint32_t> ring;
    for (const auto& p : h) {
      ring.push_back(static_cast<std::uint32_t>(pts.size()));
      pts.push_back(p);
    }
    if (ring.size() < 3) continue;
    if (ring_area(pts, ring) > 0) std::reverse(ring.begin(), ring.end());
    hole_rings.push_back(std::move(ring));
  }
  // Bridge holes into the outer ring, rightmost hole first.
  std::sort(hole_rings.begin(), hole_rings.end(), [&](const auto& a, const auto& b) {
    auto mx = [&](const auto& r) {
      double m = -1e300;
      for (auto i : r) m = std::max(m, pts[i].x());
      return m;
    };
    return mx(a) > mx(b);
  });
  for (std::size_t h = 0; h < hole_rings.size(); ++h) {
    const auto& ring = hole_rings[h];
    std::size_t mi = 0;
    for (std::size_t i = 1; i < ring.size(); ++i)
      if (pts[ring[i]].x() > pts[ring[mi]].x()) mi = i;
    const Vec2 m = pts[ring[mi]];
    std::size_t best = poly.size();
    double best_d = 1e300;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 v = pts[poly[i]];
      double dist = (v - m).squaredNorm();
      if (dist >= best_d) continue;
      bool blocked = false;
      auto check_ring = [&](const std::vector<std::uint32_t>& r) {
        for (std::size_t k = 0; k < r.size() && !blocked; ++k)
          blocked = bridge_blocked(m, v, pts[r[k]], pts[r[(k + 1) % r.size()]]);
      };
      check_ring(poly);
      for (std::size_t o = h; o < hole_rings.size() && !blocked; ++o) check_ring(hole_rings[o]);
      if (!blocked) {
        best = i;
        best_d = dist;
      }
    }
    if (best == poly.size()) continue;  // no visible bridge; hole dropped
    std::vector<std::uint32_t> merged(poly.begin(), poly.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    for (std::size_t k = 0; k <= ring.size(); ++k) merged.push_back(ring[(mi + k) % ring.size()]);
    merged.insert(merged.end(), poly.begin() + static_cast<std::ptrdiff_t>(best), poly.end());
    poly = std::move(merged);
  }

  std::vector<std::array<std::uint32_t, 3>> tris;
  std::vector<std::uint32_t> work = poly;
  std::size_t guard = 0;
  while (work.size() > 3 && guard < 4 * poly.size() * poly.size() + 16) {
    ++guard;
    const std::size_t n = work.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto ia = work[(i + n - 1) % n], ib = work[i], ic = work[(i + 1) % n];
      const Vec2 &a = pts[ia], &b = pts[ib], &c = pts[ic];
      double turn = cross2(b - a, c - b);
      if (turn <= 0) continue;
      bool contains = false;
      for (std::size_t k = 0; k < n && !contains; ++k) {
        auto ik = work[k];
        if (ik == ia || ik == ib || ik == ic) continue;
        const Vec2& p = pts[ik];
        if (p == a || p == b || p == c) continue;
        contains = point_in_triangle(p, a, b, c);
      }
      if (contains) continue;
      tris.push_back({ia, ib, ic});
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (clipped) continue;
    // Only reflex or flat vertices remain: drop a flat one, else give up with a fan.
    bool dropped = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 &a = pts[work[(i + n - 1) % n]], &b = pts[work[i]], &c = pts[work[(i + 1) % n]];
      if (std::abs(cross2(b - a, c - b)) <= 1e-18) {
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i));
        dropped = true;
        break;
      }
    }
    if (!dropped) break;
  }
  if (work.size() == 3) {
    tris.push_back({work[0], work[1], work[2]});
  } else if (work.size() > 3) {
    for (std::size_t i = 1; i + 1 < work.size(); ++i) tris.push_back({work[0], work[i], work[i + 1]});
  }
  return tris;
}

void write_obj(std::ostream& out, std::span<const Mesh> meshes) {
  std::size_t base = 1;
  out.precision(9);
  for (const auto& m : meshes) {
    out << "o element_" << m.source_element << "\n";
    for (const auto& v : m.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << "\n";
    for (const auto& t : m.triangles)
      out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << "\n";
    base += m.vertices.size();
  }
}

}  // namespace geobim
