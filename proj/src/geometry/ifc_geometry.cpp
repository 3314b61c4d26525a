#include <cmath>
#include <numbers>
#include <set>

#include "geobim/error.hpp"
#include "geobim/ifc_geometry.hpp"

namespace geobim {

namespace {

Vec3 point3(const IfcGraph& graph, const EntityInstance* point, double scale) {
  Vec3 p = Vec3::Zero();
  if (!point) return p;
  auto c = attribute(graph, *point, "Coordinates").number_list();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, c.size()); ++i) p[static_cast<Eigen::Index>(i)] = c[i] * scale;
  return p;
}

std::optional<Vec3> direction3(const IfcGraph& graph, const EntityInstance* dir) {
  if (!dir) return std::nullopt;
  auto r = attribute(graph, *dir, "DirectionRatios").number_list();
  Vec3 d = Vec3::Zero();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, r.size()); ++i) d[static_cast<Eigen::Index>(i)] = r[i];
  if (d.norm() < 1e-12) return std::nullopt;
  return d.normalized();
}

/// Orthonormal frame from a main axis and an approximate x reference.
Eigen::Matrix3d frame_from(const Vec3& z_axis, std::optional<Vec3> x_ref) {
  Vec3 z = z_axis.normalized();
  Vec3 x = x_ref.value_or(Vec3::UnitX());
  x = x - x.dot(z) * z;
  if (x.norm() < 1e-9) {
    x = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    x = (x - x.dot(z) * z);
  }
  x.normalize();
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return r;
}

struct Tessellator {
  const IfcGraph& graph;
  const TessellationOptions& options;
  double scale;
  std::vector<std::string> unsupported;
  std::set<EntityId> active;

  std::vector<Vec2> polyline2d(const EntityInstance& curve, bool& approximate) {
    std::vector<Vec2> pts;
    if (curve.ifc_class == "IFCPOLYLINE") {
      for (EntityId pid : attribute(graph, curve, "Points").ref_list()) {
        Vec3 p = point3(graph, graph.find(pid), scale);
        pts.emplace_back(p.x(), p.y());
      }
    } else if (curve.ifc_class == "IFCINDEXEDPOLYCURVE") {
      const auto* list = follow(graph, curve, "Points");
      std::vector<Vec2> coords;
      if (list)
        if (auto* rows = attribute(graph, *list, "CoordList").list())
          for (const auto& row : *rows) {
            auto c = row.number_list();
            if (c.size() >= 2) coords.emplace_back(c[0] * scale, c[1] * scale);
          }
      const auto* segments = attribute(graph, curve, "Segments").list();
      if (!segments) {
        pts = coords;
      } else {
        for (const auto& seg : *segments) {
          const auto* typed = std::get_if<TypedValue>(&seg.value);
          if (!typed || typed->args.empty()) continue;
          if (typed->type == "IFCARCINDEX") approximate = true;
          for (double idx : typed->args[0].number_list()) {
            auto i = static_cast<std::size_t>(idx) - 1;
            if (i < coords.size() && (pts.empty() || pts.back() != coords[i])) pts.push_back(coords[i]);
          }
        }
      }
    } else {
      throw Error(ErrorCode::Unsupported, "unsupported profile curve " + curve.ifc_class, curve.ifc_class);
    }
    if (pts.size() > 1 && (pts.front() - pts.back()).norm() < options.tolerances.vertex_weld) pts.pop_back();
    return pts;
  }

  /// Profile outer ring and holes in the profile's own 2D frame.
  void profile(const EntityInstance& prof, std::vector<Vec2>& outer, std::vector<std::vector<Vec2>>& holes,
               bool& approximate) {
    Eigen::Affine2d pos = Eigen::Affine2d::Identity();
    if (const auto* p = follow(graph, prof, "Position")) {
      Vec3 o = point3(graph, follow(graph, *p, "Location"), scale);
      auto x = direction3(graph, follow(graph, *p, "RefDirection")).value_or(Vec3::UnitX());
      Eigen::Matrix2d r;
      Vec2 xd = Vec2(x.x(), x.y()).normalized();
      r << xd.x(), -xd.y(), xd.y(), xd.x();
      pos.linear() = r;
      pos.translation() = Vec2(o.x(), o.y());
    }
    const auto& cls = prof.ifc_class;
    if (cls == "IFCRECTANGLEPROFILEDEF") {
      double hx = attribute(graph, prof, "XDim").number().value_or(0) * scale / 2;
      double hy = attribute(graph, prof, "YDim").number().value_or(0) * scale / 2;
      outer = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
    } else if (cls == "IFCCIRCLEPROFILEDEF") {
      const double r = attribute(graph, prof, "Radius").number().value_or(0) * scale;
      const int n = std::max(3, options.circle_segments);
      // Radius chosen so the polygon area equals the circle area.
      const double step = 2 * std::numbers::pi / n;
      const double re = r * std::sqrt(std::numbers::pi / (0.5 * n * std::sin(step)));
      for (int i = 0; i < n; ++i) outer.emplace_back(re * std::cos(i * step), re * std::sin(i * step));
    } else if (cls == "IFCARBITRARYCLOSEDPROFILEDEF" || cls == "IFCARBITRARYPROFILEDEFWITHVOIDS") {
      const auto* curve = follow(graph, prof, "OuterCurve");
      if (!curve) throw Error(ErrorCode::Unsupported, "profile without outer curve", cls);
      outer = polyline2d(*curve, approximate);
      if (cls == "IFCARBITRARYPROFILEDEFWITHVOIDS")
        for (EntityId cid : attribute(graph, prof, "InnerCurves").ref_list())
          if (const auto* c = graph.find(cid)) holes.push_back(polyline2d(*c, approximate));
    } else {
      throw Error(ErrorCode::Unsupported, "unsupported profile " + cls, cls);
    }
    for (auto& p : outer) p = pos * p;
    for (auto& h : holes)
      for (auto& p : h) p = pos * p;
  }

  Mesh extrusion(const EntityInstance& solid) {
    const auto* prof = follow(graph, solid, "SweptArea");
    if (!prof) throw Error(ErrorCode::Unsupported, "extrusion without profile", solid.ifc_class);
    std::vector<Vec2> outer;
    std::vector<std::vector<Vec2>> holes;
    Mesh mesh;
    profile(*prof, outer, holes, mesh.approximate);
    if (outer.size() < 3) throw Error(ErrorCode::Unsupported, "degenerate profile", prof->ifc_class);
    const double depth = attribute(graph, solid, "Depth").number().value_or(0) * scale;
    const Vec3 dir = direction3(graph, follow(graph, solid, "ExtrudedDirection")).value_or(Vec3::UnitZ());
    const Vec3 offset = dir * depth;

    std::vector<std::vector<Vec2>> loops{outer};
    loops.insert(loops.end(), holes.begin(), holes.end());
    for (auto& loop : loops) {
      // Outer ring CCW, holes CW, so side faces point outward for positive extrusion.
      const bool is_outer = &loop == &loops.front();
      if ((signed_area(loop) > 0) != is_outer) std::reverse(loop.begin(), loop.end());
    }
    auto tris = triangulate_polygon(loops.front(), {loops.begin() + 1, loops.end()});
    std::uint32_t n_all = 0;
    for (const auto& l : loops) n_all += static_cast<std::uint32_t>(l.size());
    for (const auto& l : loops)
      for (const auto& p : l) mesh.vertices.emplace_back(p.x(), p.y(), 0.0);
    for (const auto& l : loops)
      for (const auto& p : l) mesh.vertices.push_back(Vec3(p.x(), p.y(), 0.0) + offset);
    const bool up = offset.z() >= 0;
    for (const auto& t : tris) {
      if (up) {
        mesh.triangles.push_back({t[0], t[2], t[1]});
        mesh.triangles.push_back({t[0] + n_all, t[1] + n_all, t[2] + n_all});
      } else {
        mesh.triangles.push_back({t[0], t[1], t[2]});
        mesh.triangles.push_back({t[0] + n_all, t[2] + n_all, t[1] + n_all});
      }
    }
    std::uint32_t base = 0;
    for (const auto& l : loops) {
      const auto n = static_cast<std::uint32_t>(l.size());
      for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t a = base + i, b = base + (i + 1) % n;
        mesh.triangles.push_back({a, b, b + n_all});
        mesh.triangles.push_back({a, b + n_all, a + n_all});
      }
      base += n;
    }
    if (const auto* pos = follow(graph, solid, "Position")) {
      Transform xf = axis_placement(graph, *pos);
      mesh = transformed(mesh, Eigen::Affine3d(xf.matrix()));
    }
    return mesh;
  }

  void add_face(Mesh& mesh, std::vector<Vec3> outer, std::vector<std::vector<Vec3>> inner) {
    if (outer.size() < 3) return;
    Vec3 normal = Vec3::Zero();  // Newell
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const Vec3& a = outer[i];
      const Vec3& b = outer[(i + 1) % outer.size()];
      normal += Vec3((a.y() - b.y()) * (a.z() + b.z()), (a.z() - b.z()) * (a.x() + b.x()),
                     (a.x() - b.x()) * (a.y() + b.y()));
    }
    if (normal.norm() < 1e-15) return;
    Eigen::Matrix3d frame = frame_from(normal, std::nullopt);
    auto project = [&](const std::vector<Vec3>& loop) {
      std::vector<Vec2> out;
      for (const auto& p : loop) {
        Vec3 q = frame.transpose() * p;
        out.emplace_back(q.x(), q.y());
      }
      return out;
    };
    std::vector<std::vector<Vec2>> holes2;
    for (const auto& h : inner) holes2.push_back(project(h));
    std::vector<Vec2> outer2 = project(outer);
    // outer loop is CCW in this frame, so CCW triangles keep the face orientation
    auto tris = triangulate_polygon(outer2, holes2);
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (const auto& p : outer) mesh.vertices.push_back(p);
    for (const auto& h : inner)
      for (const auto& p : h) mesh.vertices.push_back(p);
    for (const auto& t : tris) mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }

  std::vector<Vec3> loop_points(const EntityInstance& loop) {
    std::vector<Vec3> pts;
    if (loop.ifc_class != "IFCPOLYLOOP") {
      unsupported.push_back(loop.ifc_class);
      return pts;
    }
    for (EntityId pid : attribute(graph, loop, "Polygon").ref_list()) pts.push_back(point3(graph, graph.find(pid), scale));
    return pts;
  }

  void shell(Mesh& mesh, const EntityInstance& sh) {
    for (EntityId fid : attribute(graph, sh, "CfsFaces").ref_list()) {
      const auto* face = graph.find(fid);
      if (!face) continue;
      std::vector<Vec3> outer;
      std::vector<std::vector<Vec3>> inner;
      for (EntityId bid : attribute(graph, *face, "Bounds").ref_list()) {
        const auto* bound = graph.find(bid);
        if (!bound) continue;
        const auto* loop = follow(graph, *bound, "Bound");
        if (!loop) continue;
        auto pts = loop_points(*loop);
        if (attribute(graph, *bound, "Orientation").enumeration() == "F") std::reverse(pts.begin(), pts.end());
        if (bound->ifc_class == "IFCFACEOUTERBOUND" && outer.empty()) outer = std::move(pts);
        else inner.push_back(std::move(pts));
      }
      if (outer.empty() && !inner.empty()) {
        outer = std::move(inner.front());
        inner.erase(inner.begin());
      }
      add_face(mesh, std::move(outer), std::move(inner));
    }
  }

  std::vector<Vec3> point_list3(const EntityInstance* list) {
    std::vector<Vec3> pts;
    if (!list) return pts;
    if (auto* rows = attribute(graph, *list, "CoordList").list())
      for (const auto& row : *rows) {
        auto c = row.number_list();
        if (c.size() >= 3) pts.emplace_back(c[0] * scale, c[1] * scale, c[2] * scale);
      }
    return pts;
  }

  Mesh face_set(const EntityInstance& item) {
    Mesh mesh;
    auto coords = point_list3(follow(graph, item, "Coordinates"));
    std::vector<std::size_t> pn;
    for (double v : attribute(graph, item, "PnIndex").number_list()) pn.push_back(static_cast<std::size_t>(v));
    auto lookup = [&](double one_based) -> std::optional<Vec3> {
      auto i = static_cast<std::size_t>(one_based);
      if (!pn.empty()) {
        if (i == 0 || i > pn.size()) return std::nullopt;
        i = pn[i - 1];
      }
      if (i == 0 || i > coords.size()) return std::nullopt;
      return coords[i - 1];
    };
    auto loop = [&](const StepValue& indices) {
      std::vector<Vec3> pts;
      for (double v : indices.number_list())
        if (auto p = lookup(v)) pts.push_back(*p);
      return pts;
    };
    if (item.ifc_class == "IFCTRIANGULATEDFACESET") {
      if (auto* rows = attribute(graph, item, "CoordIndex").list())
        for (const auto& row : *rows) add_face(mesh, loop(row), {});
    } else {
      for (EntityId fid : attribute(graph, item, "Faces").ref_list()) {
        const auto* face = graph.find(fid);
        if (!face) continue;
        std::vector<std::vector<Vec3>> inner;
        if (face->ifc_class == "IFCINDEXEDPOLYGONALFACEWITHVOIDS")
          if (auto* rows = attribute(graph, *face, "InnerCoordIndices").list())
            for (const auto& row : *rows) inner.push_back(loop(row));
        add_face(mesh, loop(attribute(graph, *face, "CoordIndex")), std::move(inner));
      }
    }
    return mesh;
  }

  Eigen::Affine3d cartesian_operator(const EntityInstance& op) {
    Vec3 origin = point3(graph, follow(graph, op, "LocalOrigin"), scale);
    auto x = direction3(graph, follow(graph, op, "Axis1"));
    auto z = direction3(graph, follow(graph, op, "Axis3")).value_or(Vec3::UnitZ());
    const double s = attribute(graph, op, "Scale").number().value_or(1.0);
    const double s2 = attribute(graph, op, "Scale2").number().value_or(s);
    const double s3 = attribute(graph, op, "Scale3").number().value_or(s);
    Eigen::Affine3d xf = Eigen::Affine3d::Identity();
    xf.linear() = frame_from(z, x) * Eigen::Vector3d(s, s2, s3).asDiagonal();
    xf.translation() = origin;
    return xf;
  }

  Mesh item(EntityId id) {
    const auto* inst = graph.find(id);
    if (!inst) return {};
    if (!active.insert(id).second) throw Error(ErrorCode::Unsupported, "recursive representation item", inst->ifc_class);
    struct Release {
      std::set<EntityId>& s;
      EntityId id;
      ~Release() { s.erase(id); }
    } release{active, id};

    const auto& cls = inst->ifc_class;
    if (cls == "IFCEXTRUDEDAREASOLID") return extrusion(*inst);
    if (cls == "IFCFACETEDBREP" || cls == "IFCFACETEDBREPWITHVOIDS") {
      Mesh mesh;
      if (const auto* outer = follow(graph, *inst, "Outer")) shell(mesh, *outer);
      return mesh;
    }
    if (cls == "IFCSHELLBASEDSURFACEMODEL") {
      Mesh mesh;
      for (EntityId sid : attribute(graph, *inst, "SbsmBoundary").ref_list())
        if (const auto* sh = graph.find(sid)) shell(mesh, *sh);
      return mesh;
    }
    if (cls == "IFCTRIANGULATEDFACESET" || cls == "IFCPOLYGONALFACESET") return face_set(*inst);
    if (cls == "IFCMAPPEDITEM") {
      const auto* source = follow(graph, *inst, "MappingSource");
      if (!source) return {};
      Eigen::Affine3d origin = Eigen::Affine3d::Identity();
      if (const auto* o = follow(graph, *source, "MappingOrigin")) origin = Eigen::Affine3d(axis_placement(graph, *o).matrix());
      Eigen::Affine3d target = Eigen::Affine3d::Identity();
      if (const auto* t = follow(graph, *inst, "MappingTarget")) target = cartesian_operator(*t);
      Mesh mesh;
      if (const auto* rep = follow(graph, *source, "MappedRepresentation"))
        for (EntityId sub : attribute(graph, *rep, "Items").ref_list()) {
          try {
            mesh.append(item(sub), target * origin);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::Unsupported) throw;
            unsupported.push_back(e.detail());
          }
        }
      return mesh;
    }
    if (cls == "IFCBOOLEANCLIPPINGRESULT" || cls == "IFCBOOLEANRESULT") {
      auto first = attribute(graph, *inst, "FirstOperand").ref();
      if (!first) return {};
      Mesh mesh = item(*first);
      mesh.approximate = true;
      return mesh;
    }
    throw Error(ErrorCode::Unsupported, "unsupported representation item " + cls, cls);
  }
};

}  // namespace

Transform axis_placement(const IfcGraph& graph, const EntityInstance& placement) {
  Transform xf = Transform::Identity();
  const double scale = graph.length_to_meters;
  xf.translation() = point3(graph, follow(graph, placement, "Location"), scale);
  if (placement.ifc_class == "IFCAXIS2PLACEMENT3D") {
    auto z = direction3(graph, follow(graph, placement, "Axis")).value_or(Vec3::UnitZ());
    xf.linear() = frame_from(z, direction3(graph, follow(graph, placement, "RefDirection")));
  } else if (placement.ifc_class == "IFCAXIS2PLACEMENT2D") {
    xf.linear() = frame_from(Vec3::UnitZ(), direction3(graph, follow(graph, placement, "RefDirection")));
  }
  return xf;
}

Transform resolve_local_placement(const IfcGraph& graph, EntityId placement_id) {
  Transform xf = Transform::Identity();
  std::set<EntityId> seen;
  std::optional<EntityId> current = placement_id;
  while (current) {
    if (!seen.insert(*current).second)
      throw Error(ErrorCode::CyclicPlacement, "placement chain revisits #" + std::to_string(*current),
                  std::to_string(*current));
    const auto* lp = graph.find(*current);
    if (!lp || lp->ifc_class != "IFCLOCALPLACEMENT") break;
    if (const auto* rel = follow(graph, *lp, "RelativePlacement")) xf = axis_placement(graph, *rel) * xf;
    current = attribute(graph, *lp, "PlacementRelTo").ref();
  }
  return xf;
}

Transform resolve_placement(const IfcGraph& graph, EntityId element_id) {
  const auto& inst = graph.at(element_id);
  auto placement = attribute(graph, inst, "ObjectPlacement").ref();
  if (!placement) placement = inst.attr(5).ref();
  if (!placement) return Transform::Identity();
  return resolve_local_placement(graph, *placement);
}

Transform model_frame(const IfcGraph& graph) {
  auto sites = graph.of_class("IFCSITE");
  if (sites.empty()) return Transform::Identity();
  return resolve_placement(graph, sites.front()->id).inverse();
}

Mesh tessellate_item(const IfcGraph& graph, EntityId item_id, const TessellationOptions& options) {
  Tessellator t{graph, options, graph.length_to_meters, {}, {}};
  Mesh mesh = t.item(item_id);
  mesh.cleanup(options.tolerances);
  return mesh;
}

Mesh tessellate(const IfcGraph& graph, EntityId element_id, const TessellationOptions& options) {
  const auto& inst = graph.at(element_id);
  const auto* shape = follow(graph, inst, "Representation");
  if (!shape) {
    if (auto r = inst.attr(6).ref()) shape = graph.find(*r);
  }
  if (!shape) throw Error(ErrorCode::Unsupported, "element has no representation", "none");

  std::vector<const EntityInstance*> reps;
  for (EntityId rid : attribute(graph, *shape, "Representations").ref_list())
    if (const auto* rep = graph.find(rid)) reps.push_back(rep);
  std::vector<const EntityInstance*> body;
  for (const auto* rep : reps)
    if (attribute(graph, *rep, "RepresentationIdentifier").text() == "Body") body.push_back(rep);
  if (body.empty())
    for (const auto* rep : reps) {
      auto ident = attribute(graph, *rep, "RepresentationIdentifier").text();
      if (!ident || *ident == "Facetation" || *ident == "Reference") body.push_back(rep);
    }

  Tessellator t{graph, options, graph.length_to_meters, {}, {}};
  Mesh local;
  for (const auto* rep : body)
    for (EntityId item : attribute(graph, *rep, "Items").ref_list()) {
      try {
        local.append(t.item(item));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Unsupported) throw;
        t.unsupported.push_back(e.detail());
      }
    }
  local.cleanup(options.tolerances);
  if (local.empty()) {
    std::string kinds;
    for (const auto& k : t.unsupported) kinds += (kinds.empty() ? "" : ",") + k;
    if (kinds.empty()) kinds = body.empty() ? "no body representation" : "empty geometry";
    throw Error(ErrorCode::Unsupported, "no supported geometry for #" + std::to_string(element_id) + " (" + kinds + ")",
                kinds);
  }
  if (!t.unsupported.empty()) local.approximate = true;
  Transform xf = model_frame(graph) * resolve_placement(graph, element_id);
  Mesh out = transformed(local, Eigen::Affine3d(xf.matrix()));
  out.source_element = element_id;
  return out;
}

}  // namespace geobim
