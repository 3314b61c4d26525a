// One line per acceptance criterion; nonzero exit when any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "geobim/checks.hpp"
#include "geobim/error.hpp"
#include "geobim/export.hpp"
#include "geobim/footprint.hpp"
#include "geobim/ifc.hpp"
#include "geobim/ifc_geometry.hpp"
#include "geobim/service.hpp"
#include "geobim/step.hpp"
#include "ifc_builder.hpp"
#include "oracles.hpp"

#include <httplib.h>

using namespace geobim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EXPECT(cond, what)                                        \
  do {                                                            \
    if (!(cond)) {                                                \
      std::ostringstream msg_;                                    \
      msg_ << what;                                               \
      throw Failed(msg_.str());                                   \
    }                                                             \
  } while (0)

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixture_path(const std::string& name) { return std::string(GEOBIM_FIXTURE_DIR) + "/" + name; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FederatedModel model(const std::string& name) {
  auto g = std::make_shared<const IfcGraph>(load_ifc(fixture::fixture_text(name)));
  return repair_storeys(federate({g}, {}, {name}));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GEOBIM_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / ("geobim_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::vector<oracle::P2> as_oracle(const std::vector<Vec2>& v) { return {v.begin(), v.end()}; }

// Fixtures that carry a building; the rest exercise parser errors or federation.
bool buildable(const std::string& name) {
  return name != "dangling.ifc" && name != "minimal.ifc" && name.rfind("frame_", 0) != 0 &&
         name.rfind("stepped_arch", 0) != 0 && name.rfind("stepped_struct", 0) != 0;
}

// ---------------------------------------------------------------------------

std::string parser_oracle() {
  const auto t0 = Clock::now();
  std::size_t n = 0;
  for (const auto& [name, text] : fixture::all_fixtures()) {
    const auto g = parse_step(text);
    const auto want = oracle::count_record_starts(text);
    EXPECT(g.instances.size() == want, name << ": " << g.instances.size() << " instances, scan found " << want);
    ++n;
  }
  try {
    parse_step(fixture::fixture_text("dangling.ifc"), ParseOptions{.strict = true});
    EXPECT(false, "strict parse of dangling.ifc succeeded");
  } catch (const Error& e) {
    EXPECT(e.code() == ErrorCode::DanglingReference, "strict parse raised " << to_string(e.code()));
  }
  const double t = seconds_since(t0);
  EXPECT(t < 5.0, "took " << t << " s");
  std::ostringstream out;
  out << n << " fixtures, " << t << " s";
  return out.str();
}

std::string geometry_invariants() {
  Mesh cube;
  for (int i = 0; i < 8; ++i) cube.vertices.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  cube.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                    {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  double len = 0;
  for (const auto& s : slice_mesh(cube, 0.5)) {
    len += s.length();
    const bool on_boundary = (std::abs(s.a.x() - s.b.x()) < 1e-12 && (std::abs(s.a.x()) < 1e-12 || std::abs(s.a.x() - 1) < 1e-12)) ||
                             (std::abs(s.a.y() - s.b.y()) < 1e-12 && (std::abs(s.a.y()) < 1e-12 || std::abs(s.a.y() - 1) < 1e-12));
    EXPECT(on_boundary, "segment off the unit-square boundary");
  }
  EXPECT(std::abs(len - 4.0) <= 1e-6, "unit cube slice length " << len);

  fixture::IfcBuilder b;
  const int s = b.storey("ground", 0);
  const double r = 0.35;
  b.cylinder(s, "Column", 0, 0, 0, r, 3);
  auto cyl = federate({std::make_shared<const IfcGraph>(load_ifc(b.str()))});
  const Mesh* col = nullptr;
  for (const auto& [k, e] : cyl.elements)
    if (e.name == "Column" && e.mesh) col = &*e.mesh;
  EXPECT(col, "cylinder not meshed");
  std::vector<oracle::P2> pts;
  for (const auto& seg : slice_mesh(*col, 1.5)) {
    pts.push_back(seg.a);
    pts.push_back(seg.b);
  }
  const double area = oracle::convex_hull_area(pts);
  const double rel = std::abs(area - M_PI * r * r) / (M_PI * r * r);
  EXPECT(rel <= 0.005, "circle section off by " << 100 * rel << " %");

  auto zoo = model("zoo.ifc");
  const Mesh* slab = nullptr;
  for (const auto& [k, e] : zoo.elements)
    if (e.name == "L slab" && e.mesh) slab = &*e.mesh;
  EXPECT(slab, "L slab not meshed");
  const auto base = slice_mesh(*slab, 0.15);
  EXPECT(!base.empty(), "empty base slice");
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), off(-100, 100);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double a = ang(rng);
    const Vec3 t(off(rng), off(rng), off(rng));
    const Eigen::Affine3d xf = Eigen::Translation3d(t) * Eigen::AngleAxisd(a, Vec3::UnitZ());
    const auto moved = slice_mesh(transformed(*slab, xf), 0.15 + t.z());
    EXPECT(moved.size() == base.size(), "segment count changed under motion " << i);
    const Eigen::Rotation2Dd rot(a);
    for (const auto& sb : base) {
      const Vec2 pa = rot * sb.a + t.head<2>(), pb = rot * sb.b + t.head<2>();
      double best = INFINITY;
      for (const auto& sm : moved)
        best = std::min({best, std::max((sm.a - pa).norm(), (sm.b - pb).norm()),
                         std::max((sm.a - pb).norm(), (sm.b - pa).norm())});
      worst = std::max(worst, best);
    }
  }
  EXPECT(worst <= 1e-6, "equivariance error " << worst << " m");
  std::ostringstream out;
  out << "cube " << len << " m, circle " << 100 * rel << " %, motions " << worst << " m";
  return out.str();
}

std::string dbscan_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts(200);
    for (auto& p : pts) p = Vec2(u(rng), u(rng));
    const double eps = 0.2 + 0.01 * (trial % 20);
    const std::size_t min_pts = 3 + trial % 4;
    auto got = dbscan(pts, eps, min_pts);
    auto want = oracle::brute_dbscan(as_oracle(pts), eps, min_pts);
    EXPECT(got == want, "instance " << trial << " differs");
  }
  const double t = seconds_since(t0);
  EXPECT(t < 10.0, "took " << t << " s");
  std::ostringstream out;
  out << "50 instances, " << t << " s";
  return out.str();
}

std::string concave_hull_checks() {
  std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto sq = concave_hull(square, 3);
  EXPECT(sq.ring.size() == 4 && std::abs(sq.area() - 1.0) < 1e-12, "unit square hull area " << sq.area());

  std::ostringstream out;
  std::mt19937 rng(5);
  for (double spacing : {0.2, 0.05}) {
    std::vector<Segment2D> segs;
    for (int i = 0; i < 16; ++i) {
      const double a0 = i * 2 * M_PI / 16, a1 = (i + 1) * 2 * M_PI / 16;
      segs.push_back({{6 * std::cos(a0), 6 * std::sin(a0)}, {6 * std::cos(a1), 6 * std::sin(a1)}});
    }
    auto pts = weld_points(sample_segments(segs, spacing));
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 300; ++i) pts.emplace_back(u(rng), u(rng));
    const double hull = concave_hull(pts, 7).area();
    const double ref = oracle::convex_hull_area(as_oracle(pts));
    const double rel = std::abs(hull - ref) / ref;
    EXPECT(rel <= (spacing > 0.1 ? 0.02 : 0.01), "convex cloud at " << spacing << " m off by " << 100 * rel << " %");
    out << "cloud@" << spacing << " " << 100 * rel << " %, ";
  }

  // 10 x 8 minus a 4 x 3 corner notch (L) and minus a 4 x 3 notch mid-edge (U). The convex hull
  // refills the notch triangle of the L (6 m2) and the whole notch of the U (12 m2).
  struct Notched {
    const char* name;
    std::vector<Vec2> corners;
    double refilled;
  };
  const std::vector<Notched> shapes{
      {"L", {{0, 0}, {10, 0}, {10, 5}, {6, 5}, {6, 8}, {0, 8}}, 6.0},
      {"U", {{0, 0}, {10, 0}, {10, 8}, {7, 8}, {7, 5}, {3, 5}, {3, 8}, {0, 8}}, 12.0},
  };
  for (const auto& shape : shapes) {
    std::vector<Segment2D> segs;
    for (std::size_t i = 0; i < shape.corners.size(); ++i)
      segs.push_back({shape.corners[i], shape.corners[(i + 1) % shape.corners.size()]});
    auto pts = weld_points(sample_segments(segs, 0.2));
    const auto hull = concave_hull(pts, 7);
    const double convex = oracle::convex_hull_area(as_oracle(pts));
    EXPECT(oracle::ring_is_simple(as_oracle(hull.ring)), shape.name << " hull not simple");
    EXPECT(std::abs(hull.area() - 68.0) / 68.0 <= 0.02, shape.name << " hull area " << hull.area());
    EXPECT(convex - hull.area() >= 0.9 * shape.refilled,
           shape.name << " notch lost: convex " << convex << ", hull " << hull.area());
    out << shape.name << " " << hull.area() << " m2" << (shape.name[0] == 'L' ? ", " : "");
  }
  return out.str();
}

std::string stepped_overlaps() {
  const auto t0 = Clock::now();
  auto m = model("stepped.ifc");
  auto fs = overlap_table(compute_footprints(m), m.ground_storey);
  EXPECT(fs.overlaps.size() == 10, "storeys " << fs.overlaps.size());
  EXPECT(std::abs(fs.overlaps[0] - 100) <= 1.0 && std::abs(fs.overlaps[1] - 100) <= 1.0, "base floors not 100 %");
  for (std::size_t i = 2; i < 10; ++i)
    EXPECT(std::abs(fs.overlaps[i] - 25.0) <= 1.0, "floor " << i << " overlap " << fs.overlaps[i]);
  const std::string csv = overlaps_csv(fs);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT(line == "storey,elevation_m,area_m2,polygon_count,overlap_pct", "header " << line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto pct = line.substr(line.rfind(',') + 1);
    EXPECT(line.substr(0, line.find(',')) == m.storeys[rows].name, "row storey " << line);
    EXPECT(pct.find('.') != std::string::npos && pct.size() - pct.find('.') == 2, "percent not one decimal: " << pct);
    ++rows;
  }
  EXPECT(rows == 10, "csv rows " << rows);
  const double t = seconds_since(t0);
  EXPECT(t < 30.0, "took " << t << " s");
  std::ostringstream out;
  out << "100/100/" << fs.overlaps[2] << ", " << t << " s";
  return out.str();
}

std::string reference_values() {
  auto tower = model("tower.ifc");
  const double h = max_height(tower);
  EXPECT(std::abs(h - 103.47) <= 0.01, "tower height " << h);

  auto oh = model("overhang.ifc");
  std::vector<OverhangLine> lines{OverhangLine::parse("0,30,40,30,left,Hertekade"),
                                  OverhangLine::parse("0,0,40,0,right,Boompjes")};
  auto r = overhang_distances(oh, {}, lines);
  EXPECT(std::abs(r[0].max_m - 10.5) <= 0.05, "north overhang " << r[0].max_m);
  EXPECT(std::abs(r[1].max_m - 6.4) <= 0.05, "south overhang " << r[1].max_m);
  EXPECT(r[0].limit_m == 10.0 && r[1].limit_m == 5.0, "limits " << r[0].limit_m << "/" << r[1].limit_m);
  EXPECT(check_overhang(oh, r).verdict == Verdict::Fail, "overhang did not fail");

  auto ceiling = model("ceiling.ifc");
  auto t = measure_ensemble_thickness(ceiling, find_storey(ceiling, "26th"));
  EXPECT(t && std::abs(*t - 0.59) <= 0.01, "ensemble thickness " << (t ? *t : -1));

  auto parking = model("parking.ifc");
  const auto cars = count_parking_spaces(parking, RegulationParams{}.bike_keywords).car_count;
  EXPECT(cars == 57, "parking count " << cars);
  std::ostringstream out;
  out << h << " m, " << r[0].max_m << " m, " << r[1].max_m << " m, " << *t << " m, " << cars << " spaces";
  return out.str();
}

std::string determinism_and_exit_codes(const fs::path& dir) {
  std::size_t compared = 0;
  for (const auto& [name, text] : fixture::all_fixtures()) {
    if (!buildable(name)) continue;
    const auto a = dir / "run_a", b = dir / "run_b";
    fs::create_directories(a);
    fs::create_directories(b);
    const std::string m = "\"" + fixture_path(name) + "\"";
    const int ca = run_cli("check -m " + m + " -o \"" + a.string() + "\"");
    const int cb = run_cli("check -m " + m + " -o \"" + b.string() + "\"");
    EXPECT(ca == cb, name << ": exit codes " << ca << " and " << cb);
    EXPECT(ca == 0 || ca == 2 || ca == 3, name << ": check exited " << ca);
    const std::string stem = fs::path(name).stem().string();
    const auto ra = read_file(a / (stem + "_report.json")), rb = read_file(b / (stem + "_report.json"));
    EXPECT(!ra.empty() && ra == rb, name << ": report bodies differ");
    ++compared;
  }

  const std::string cfg = (dir / "single_part.ini").string();
  std::ofstream(cfg) << "[regulation]\npart_split_threshold_pct = 100\n";
  const int pass = run_cli("check -m \"" + fixture_path("stepped.ifc") + "\" -o \"" + dir.string() + "\"");
  const int review = run_cli("check -m \"" + fixture_path("tower.ifc") + "\" -c \"" + cfg + "\" -o \"" + dir.string() + "\"");
  const int fail = run_cli("check -m \"" + fixture_path("mast120.ifc") + "\" -o \"" + dir.string() + "\"");
  const int missing = run_cli("check -m \"" + (dir / "absent.ifc").string() + "\" -o \"" + dir.string() + "\"");
  const int usage = run_cli("check");
  EXPECT(pass == 0, "stepped exited " << pass);
  EXPECT(review == 3, "tower exited " << review);
  EXPECT(fail == 2, "mast exited " << fail);
  EXPECT(missing == 1, "missing file exited " << missing);
  EXPECT(usage == 64, "usage error exited " << usage);

  EXPECT(check_max_height(model("tower.ifc"), {}).verdict == Verdict::NeedsReview, "103.47 m is not needs-review");
  EXPECT(check_max_height(model("mast120.ifc"), {}).verdict == Verdict::Fail, "120 m is not fail");
  std::ostringstream out;
  out << compared << " fixtures byte-identical, exits 0/3/2/1/64";
  return out.str();
}

std::string segmentation() {
  auto stepped = model("stepped.ifc");
  auto seg = segment_building_parts(compute_footprints(stepped), 5.0, stepped.ground_storey);
  EXPECT(seg.parts.size() == 2, "stepped parts " << seg.parts.size());
  EXPECT(seg.parts[1].first == find_storey(stepped, "2nd"), "split at storey " << seg.parts[1].first);
  auto uniform = model("uniform.ifc");
  auto useg = segment_building_parts(compute_footprints(uniform), 5.0, uniform.ground_storey);
  EXPECT(useg.parts.size() == 1, "uniform parts " << useg.parts.size());
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> area(1, 5000);
  std::uniform_int_distribution<int> len(1, 40);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> a(static_cast<std::size_t>(len(rng)));
    for (auto& v : a) v = area(rng);
    EXPECT(segment_building_parts(a, 100.0).parts.size() == 1, "series " << i << " split at 100 %");
  }
  return "stepped 2 parts split at 2nd, uniform 1, 20 random series 1";
}

std::string wkt_checks() {
  std::size_t n = 0;
  for (const auto& [name, text] : fixture::all_fixtures()) {
    if (!buildable(name)) continue;
    auto m = model(name);
    const auto& georef = m.graphs.front()->georef;
    auto fs = compute_footprints(m);
    std::vector<Frame> frames{Frame::ModelLocal};
    if (georef.site_origin && georef.logeoref_level >= LoGeoRef::L30) frames.push_back(Frame::SiteProjected);
    for (Frame f : frames)
      for (const auto& r : to_wkt(fs, georef, f, max_height(m))) {
        EXPECT(oracle::valid_wkt(r.wkt), name << ": invalid WKT " << r.wkt.substr(0, 60));
        ++n;
      }
  }
  double worst = 0;
  for (const char* name : {"georef_l30.ifc", "georef_north.ifc", "georef_north_identity.ifc", "georef_l50.ifc"}) {
    auto m = model(name);
    const auto& g = m.graphs.front()->georef;
    // rotation taking model +y onto the true north direction, then the site origin
    const Vec2 north = g.true_north.value_or(Eigen::Vector2d(0, 1));
    const double c = north.y(), sn = north.x();
    const auto& o = *g.site_origin;
    auto fs = compute_footprints(m);
    auto local = to_wkt(fs, g, Frame::ModelLocal);
    auto proj = to_wkt(fs, g, Frame::SiteProjected);
    EXPECT(local.size() == proj.size(), name << ": record count");
    for (std::size_t i = 0; i < local.size(); ++i) {
      auto a = oracle::wkt_coordinates(local[i].wkt);
      auto b = oracle::wkt_coordinates(proj[i].wkt);
      EXPECT(a.size() == b.size(), name << ": coordinate count");
      for (std::size_t k = 0; k < a.size(); ++k) {
        const oracle::P2 want(o.x() + c * a[k].x() - sn * a[k].y(), o.y() + sn * a[k].x() + c * a[k].y());
        worst = std::max(worst, (b[k] - want).norm());
      }
    }
  }
  EXPECT(worst <= 1e-3 + 1e-9, "projected error " << worst << " m");
  std::ostringstream out;
  out << n << " strings valid, projected error " << worst << " m";
  return out.str();
}

std::string service_parity(const fs::path& dir) {
  ServiceOptions o;
  o.host = "127.0.0.1";
  o.port = 0;
  Service service(o);
  const int port = service.bind();
  EXPECT(port > 0, "bind failed");
  std::thread server([&] { service.run(); });
  struct Stop {
    Service& s;
    std::thread& t;
    ~Stop() {
      s.stop();
      t.join();
    }
  } stop{service, server};

  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(120, 0);
  double cached_ms = 0;
  for (const char* name : {"stepped.ifc", "tower.ifc", "overhang.ifc"}) {
    const auto out_dir = dir / "parity";
    fs::create_directories(out_dir);
    run_cli(std::string("check -m \"") + fixture_path(name) + "\" -o \"" + out_dir.string() + "\"");
    const auto cli = read_file(out_dir / (fs::path(name).stem().string() + "_report.json"));
    EXPECT(!cli.empty(), name << ": CLI wrote no report");

    httplib::MultipartFormDataItems items{{"file", read_file(fixture_path(name)), name, "application/octet-stream"}};
    auto up = c.Post("/models", items);
    EXPECT(up && up->status == 201, name << ": upload failed");
    const std::string id = Json::parse(up->body)["id"];
    auto res = c.Post("/models/" + id + "/checks", "{}", "application/json");
    EXPECT(res && res->status == 200, name << ": /checks failed");
    EXPECT(res->body == cli, name << ": HTTP body differs from CLI report");

    const std::string body = R"({"reference_storey": "ground"})";
    auto first = c.Post("/models/" + id + "/overlaps", body, "application/json");
    EXPECT(first && first->status == 200, name << ": overlaps failed");
    const auto t0 = Clock::now();
    auto second = c.Post("/models/" + id + "/overlaps", body, "application/json");
    const double ms = 1000 * seconds_since(t0);
    EXPECT(second && second->status == 200, name << ": repeated overlaps failed");
    EXPECT(second->get_header_value("X-Cache") == "hit", name << ": repeated overlaps missed the cache");
    EXPECT(second->body == first->body, name << ": cached body differs");
    EXPECT(ms < 50.0, name << ": cached response took " << ms << " ms");
    cached_ms = std::max(cached_ms, ms);
  }
  std::ostringstream out;
  out << "3 fixtures identical, cached overlaps <= " << cached_ms << " ms";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  // optional criterion numbers select a subset; none runs all
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const fs::path dir = scratch_dir();
  struct Criterion {
    int id;
    const char* title;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "parser oracle", parser_oracle},
      {2, "geometry invariants", geometry_invariants},
      {3, "dbscan oracle equivalence", dbscan_oracle},
      {4, "concave hull", concave_hull_checks},
      {5, "stepped overlap pipeline", stepped_overlaps},
      {6, "reference-value fixtures", reference_values},
      {7, "rule engine determinism and exit codes", [&] { return determinism_and_exit_codes(dir); }},
      {8, "part segmentation", segmentation},
      {9, "wkt export", wkt_checks},
      {10, "service parity and cache", [&] { return service_parity(dir); }},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    std::string detail;
    bool ok = false;
    try {
      detail = c.run();
      ok = true;
    } catch (const Failed& e) {
      detail = e.what();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failed += !ok;
    std::printf("%s criterion %2d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.title, detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed || ran == 0 ? 1 : 0;
}
