#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fixture {

/// Every committed fixture as (file name, content). gen_fixtures writes these to
/// tests/fixtures; a test checks the committed copies are current.
std::vector<std::pair<std::string, std::string>> all_fixtures();

/// Content of one named fixture; throws when unknown.
std::string fixture_text(const std::string& name);

// Authored dimensions shared between the generator and the tests.
namespace stepped {
constexpr int kStoreys = 10;
constexpr int kBaseStoreys = 2;
constexpr double kFloor = 3.0;
constexpr double kBaseW = 30, kBaseD = 20, kTowerW = 15, kTowerD = 10;
}  // namespace stepped

namespace tower {
/// Overlap percentages per storey, ground first.
extern const std::vector<double> kProfile;
extern const std::vector<std::string> kNames;
constexpr double kGroundW = 50, kGroundD = 40, kFloor = 3.0;
constexpr double kRoofTop = 103.47;
}  // namespace tower

namespace overhang {
constexpr double kW = 40, kD = 30;
constexpr double kNorth = 10.5, kSouth = 6.4;
}  // namespace overhang

}  // namespace fixture
