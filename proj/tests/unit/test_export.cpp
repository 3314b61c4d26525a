#include <cmath>
#include <sstream>

#include <doctest.h>

#include "geobim/error.hpp"
#include "geobim/export.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace geobim;

namespace {

FootprintSet one_square(double x0, double y0, double side) {
  FootprintSet fs;
  StoreyFootprint s;
  s.storey = "ground";
  s.polygons.push_back({{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}});
  fs.storeys.push_back(s);
  return fs;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const GeoRef& georef(const FederatedModel& m) { return m.graphs.front()->georef; }

}  // namespace

TEST_SUITE("wkt") {
  TEST_CASE("unit square in the local frame") {
    auto recs = to_wkt(one_square(0, 0, 1), GeoRef{}, Frame::ModelLocal, 3.0);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].wkt == "POLYGON ((0.000 0.000, 1.000 0.000, 1.000 1.000, 0.000 1.000, 0.000 0.000))");
    CHECK(recs[0].top_elevation_m == 3.0);
  }
  TEST_CASE("projected frame translates by the site origin") {
    GeoRef g;
    g.site_origin = Vec3(1000, 2000, 0);
    g.logeoref_level = LoGeoRef::L30;
    auto recs = to_wkt(one_square(0, 0, 1), g, Frame::SiteProjected);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].wkt ==
          "POLYGON ((1000.000 2000.000, 1001.000 2000.000, 1001.000 2001.000, 1000.000 2001.000, 1000.000 2000.000))");
  }
  TEST_CASE("true north pointing along +x rotates a quarter turn") {
    auto m = testutil::model("georef_north.ifc");
    auto fs = compute_footprints(m);
    auto local = to_wkt(fs, georef(m), Frame::ModelLocal);
    auto projected = to_wkt(fs, georef(m), Frame::SiteProjected);
    REQUIRE(local.size() == projected.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
      auto a = oracle::wkt_coordinates(local[i].wkt);
      auto b = oracle::wkt_coordinates(projected[i].wkt);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        const oracle::P2 want(1000 - a[k].y(), 2000 + a[k].x());
        CHECK((b[k] - want).norm() <= 1e-3);
      }
    }
  }
  TEST_CASE("north along +y is the identity rotation") {
    auto m = testutil::model("georef_north_identity.ifc");
    auto fs = compute_footprints(m);
    auto a = oracle::wkt_coordinates(to_wkt(fs, georef(m), Frame::ModelLocal)[0].wkt);
    auto b = oracle::wkt_coordinates(to_wkt(fs, georef(m), Frame::SiteProjected)[0].wkt);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK((b[k] - a[k] - oracle::P2(1000, 2000)).norm() <= 1e-3);
  }
  TEST_CASE("every fixture exports well-formed WKT") {
    for (const auto& [name, text] : fixture::all_fixtures()) {
      if (name == "dangling.ifc" || name == "minimal.ifc" || name.rfind("frame_", 0) == 0) continue;
      CAPTURE(name);
      auto m = testutil::model(name);
      auto fs = compute_footprints(m);
      for (const auto& r : to_wkt(fs, georef(m), Frame::ModelLocal, max_height(m))) {
        CAPTURE(r.wkt);
        CHECK(oracle::valid_wkt(r.wkt));
        CHECK(r.top_elevation_m >= r.base_elevation_m);
      }
    }
  }
  TEST_CASE("disjoint wings become a multipolygon") {
    auto m = testutil::model("annex.ifc");
    auto recs = to_wkt(compute_footprints(m), georef(m), Frame::ModelLocal);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].wkt.rfind("MULTIPOLYGON ((", 0) == 0);
    CHECK(oracle::valid_wkt(recs[0].wkt));
  }
  TEST_CASE("projection needs a site origin") {
    auto m = testutil::model("georef_l20.ifc");
    auto fs = compute_footprints(m);
    try {
      to_wkt(fs, georef(m), Frame::SiteProjected);
      FAIL("expected NoGeoreference");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoGeoreference);
    }
    CHECK_NOTHROW(to_wkt(fs, georef(m), Frame::ModelLocal));
  }
  TEST_CASE("storey intervals follow the next storey") {
    auto m = testutil::model("stepped.ifc");
    auto recs = to_wkt(compute_footprints(m), georef(m), Frame::ModelLocal, max_height(m));
    REQUIRE(recs.size() == m.storeys.size());
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) CHECK(recs[i].top_elevation_m == recs[i + 1].base_elevation_m);
    CHECK(recs.back().top_elevation_m == doctest::Approx(30.0));
  }
  TEST_CASE("frame names") {
    CHECK(parse_frame("local") == Frame::ModelLocal);
    CHECK(parse_frame("site-projected") == Frame::SiteProjected);
    CHECK(parse_frame("projected") == Frame::SiteProjected);
    CHECK_THROWS_AS(parse_frame("utm"), Error);
  }
}

TEST_SUITE("json and csv") {
  TEST_CASE("rounding") {
    CHECK(round_to(1.23456, 3) == 1.235);
    CHECK(round_to(-0.0001, 3) == 0.0);
    CHECK_FALSE(std::signbit(round_to(-0.0001, 3)));
    CHECK(round_to(24.96, 1) == 25.0);
  }
  TEST_CASE("report survives a parse and dump round trip byte for byte") {
    for (const char* name : {"stepped.ifc", "tower.ifc", "lint.ifc", "parking.ifc"}) {
      CAPTURE(name);
      auto m = testutil::model(name);
      auto text = dump(report_json(run_checks(m, {}, {})));
      CHECK(dump(Json::parse(text)) == text);
      CHECK(text.back() == '\n');
    }
  }
  TEST_CASE("report is deterministic") {
    auto a = dump(report_json(run_checks(testutil::model("stepped.ifc"), {}, {})));
    auto b = dump(report_json(run_checks(testutil::model("stepped.ifc"), {}, {})));
    CHECK(a == b);
  }
  TEST_CASE("report layout") {
    auto j = report_json(run_checks(testutil::model("stepped.ifc"), {}, {}));
    CHECK(j["format"] == "geobim-report/1");
    CHECK(j["models"][0]["file"] == "stepped.ifc");
    CHECK(j["summary"]["verdict"] == "pass");
    CHECK(j["summary"]["max_height_m"] == 30.0);
    CHECK(j["storeys"].size() == 10);
    for (const char* key : {"parameters", "rules", "parts", "parking", "findings", "warnings"}) CHECK(j.contains(key));
  }
  TEST_CASE("overlaps table") {
    auto m = testutil::model("stepped.ifc");
    auto fs = overlap_table(compute_footprints(m), m.ground_storey);
    auto rows = lines_of(overlaps_csv(fs));
    REQUIRE(rows.size() == m.storeys.size() + 1);
    CHECK(rows[0] == "storey,elevation_m,area_m2,polygon_count,overlap_pct");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto pct = rows[i].substr(rows[i].rfind(',') + 1);
      CAPTURE(rows[i]);
      REQUIRE(pct.find('.') != std::string::npos);
      CHECK(pct.size() - pct.find('.') == 2);
      CHECK(std::abs(std::stod(pct) - fs.overlaps[i - 1]) <= 0.05 + 1e-9);
    }
    auto j = overlaps_json(fs);
    REQUIRE(j["rows"].size() == m.storeys.size());
    for (std::size_t i = 0; i < fs.overlaps.size(); ++i)
      CHECK(std::abs(j["rows"][i]["overlap_pct"].get<double>() - fs.overlaps[i]) <= 0.05 + 1e-9);
  }
  TEST_CASE("wkt csv quotes the geometry") {
    auto recs = to_wkt(one_square(0, 0, 1), GeoRef{}, Frame::ModelLocal, 3.0);
    auto rows = lines_of(wkt_csv(recs));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "storey,frame,wkt,base_elevation_m,top_elevation_m");
    CHECK(rows[1].find("\"POLYGON ((0.000 0.000") != std::string::npos);
  }
  TEST_CASE("verdict table ends with the overall row") {
    auto r = run_checks(testutil::model("stepped.ifc"), {}, {});
    auto rows = lines_of(verdicts_csv(r));
    REQUIRE(rows.size() == r.entries.size() + 2);
    CHECK(rows.front() == "rule,verdict");
    CHECK(rows.back() == "overall,pass");
  }
  TEST_CASE("error body") {
    auto j = error_json("NoStoreys", "model has no storeys", "x.ifc");
    CHECK(j["error"]["code"] == "NoStoreys");
    CHECK(j["error"]["detail"] == "x.ifc");
  }
}
