#include <functional>
#include <map>
#include <stdexcept>

#include "fixtures.hpp"
#include "ifc_builder.hpp"

namespace fixture {

namespace tower {
const std::vector<double> kProfile{100,  94.1, 93.8, 95.3, 93.9, 88.9, 85.9, 85.9, 86.6, 86.2, 85.9,
                                   72.3, 72.0, 67.9, 67.9, 67.9, 67.9, 67.9, 67.9, 67.9, 64.0, 63.6,
                                   63.7, 39.2, 39.2, 39.3, 35.0, 35.0, 35.1, 35.0, 35.2, 35.0, 35.0};
const std::vector<std::string> kNames{"ground", "1st",  "2nd",  "3rd",  "4th",  "5th",  "6th",  "7th",  "8th",
                                      "9th",    "10th", "11th", "12th", "13th", "14th", "15th", "16th", "17th",
                                      "18th",   "19th", "20th", "21st", "22nd", "23rd", "24th", "25th", "26th",
                                      "27th",   "28th", "29th", "30th", "31st", "32nd"};
}  // namespace tower

namespace {

std::string ordinal(int i) {
  if (i == 0) return "ground";
  const int mod100 = i % 100, mod10 = i % 10;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    if (mod10 == 1) suffix = "st";
    else if (mod10 == 2) suffix = "nd";
    else if (mod10 == 3) suffix = "rd";
  }
  return std::to_string(i) + suffix;
}

// Hand-written: comments, string escapes, an IFC2X3 header and a single wall.
const char* kMinimal = R"(ISO-10303-21;
HEADER;
/* hand written */
FILE_DESCRIPTION(('ViewDefinition [CoordinationView]'),'2;1');
FILE_NAME('minimal.ifc','2020-01-01T00:00:00',('Ann O''Neil'),('Studio \X2\00E9\X0\'),'editor','editor','');
FILE_SCHEMA(('IFC2X3'));
ENDSEC;
DATA;
#1=IFCCARTESIANPOINT((0.,0.,0.));
#2=IFCAXIS2PLACEMENT3D(#1,$,$);
#3=IFCGEOMETRICREPRESENTATIONCONTEXT($,'Model',3,1.E-05,#2,$);
#4=IFCSIUNIT(*,.LENGTHUNIT.,$,.METRE.);
#5=IFCUNITASSIGNMENT((#4));
#6=IFCPROJECT('0proj00000000000000000',$,'Minimal',$,$,$,$,(#3),#5);
#7=IFCLOCALPLACEMENT($,#2);
#8=IFCSITE('0site00000000000000000',$,'Site',$,$,#7,$,$,.ELEMENT.,(51,55,12),(4,28,45),0.,$,$);
#9=IFCLOCALPLACEMENT(#7,#2);
#10=IFCBUILDING('0bldg00000000000000000',$,'Caf\X2\00E9\X0\ ''t Hoekje',$,$,#9,$,$,.ELEMENT.,$,$,$);
#11=IFCLOCALPLACEMENT(#9,#2);
#12=IFCBUILDINGSTOREY('1sto00000000000000001',$,'Begane grond',$,$,#11,$,$,.ELEMENT.,0.);
/* a wall: 5 x 0.3 x 3 */
#13=IFCCARTESIANPOINT((2.5,0.15));
#14=IFCAXIS2PLACEMENT2D(#13,$);
#15=IFCRECTANGLEPROFILEDEF(.AREA.,$,#14,5.,0.3);
#16=IFCDIRECTION((0.,0.,1.));
#17=IFCEXTRUDEDAREASOLID(#15,#2,#16,3.);
#18=IFCSHAPEREPRESENTATION(#3,'Body','SweptSolid',(#17));
#19=IFCPRODUCTDEFINITIONSHAPE($,$,(#18));
#20=IFCLOCALPLACEMENT(#11,#2);
#21=IFCWALLSTANDARDCASE('2elm00000000000000001',$,'Wall; ''A''',$,$,#20,#19,$);
#22=IFCRELAGGREGATES('0agg100000000000000000',$,$,$,#6,(#8));
#23=IFCRELAGGREGATES('0agg200000000000000000',$,$,$,#8,(#10));
#24=IFCRELAGGREGATES('0agg300000000000000000',$,$,$,#10,(#12));
#25=IFCRELCONTAINEDINSPATIALSTRUCTURE('5rcs00000000000000001',$,$,$,(#21),#12);
ENDSEC;
END-ISO-10303-21;
)";

const char* kDangling = R"(ISO-10303-21;
HEADER;
FILE_DESCRIPTION((''),'2;1');
FILE_NAME('dangling.ifc','2020-01-01T00:00:00',(''),(''),'','','');
FILE_SCHEMA(('IFC4'));
ENDSEC;
DATA;
#1=IFCCARTESIANPOINT((0.,0.,0.));
#2=IFCAXIS2PLACEMENT3D(#1,$,$);
#3=IFCLOCALPLACEMENT(#99,#2);
ENDSEC;
END-ISO-10303-21;
)";

void stepped_into(IfcBuilder& b, bool walls, bool structure) {
  using namespace stepped;
  for (int i = 0; i < kStoreys; ++i) {
    const double z = i * kFloor;
    const int s = b.storey(ordinal(i), z);
    const bool base = i < kBaseStoreys;
    const double w = base ? kBaseW : kTowerW, d = base ? kBaseD : kTowerD;
    const double x0 = base ? 0 : (kBaseW - kTowerW) / 2, y0 = base ? 0 : (kBaseD - kTowerD) / 2;
    if (walls && structure) {
      b.shell(s, x0, y0, w, d, z, kFloor);
    } else if (walls) {
      const double t = 0.3;
      b.box(s, "IFCWALL", "Wall S", x0, y0, z + 0.2, w, t, kFloor - 0.2);
      b.box(s, "IFCWALL", "Wall N", x0, y0 + d - t, z + 0.2, w, t, kFloor - 0.2);
      b.box(s, "IFCWALL", "Wall W", x0, y0 + t, z + 0.2, t, d - 2 * t, kFloor - 0.2);
      b.box(s, "IFCWALL", "Wall E", x0 + w - t, y0 + t, z + 0.2, t, d - 2 * t, kFloor - 0.2);
      b.box(s, "IFCDOOR", "Door", x0 + 1, y0, z + 0.2, 1, 0.3, 2.1);
    } else {
      b.box(s, "IFCSLAB", "Floor", x0, y0, z, w, d, 0.2);
      b.cylinder(s, "Column", x0 + 1, y0 + 1, z + 0.2, 0.2, kFloor - 0.2);
      b.cylinder(s, "Column", x0 + w - 1, y0 + 1, z + 0.2, 0.2, kFloor - 0.2);
      b.cylinder(s, "Column", x0 + w - 1, y0 + d - 1, z + 0.2, 0.2, kFloor - 0.2);
      b.cylinder(s, "Column", x0 + 1, y0 + d - 1, z + 0.2, 0.2, kFloor - 0.2);
    }
  }
}

std::string stepped_file(double meters_per_unit) {
  IfcBuilder b({.meters_per_unit = meters_per_unit, .lat_long = std::pair{51.9, 4.48}, .project_name = "Stepped"});
  stepped_into(b, true, true);
  return b.str();
}

std::string stepped_part(bool walls) {
  IfcBuilder b({.lat_long = std::pair{51.9, 4.48}, .project_name = walls ? "Stepped arch" : "Stepped struct"});
  stepped_into(b, walls, !walls);
  return b.str();
}

std::string tower_file() {
  using namespace tower;
  IfcBuilder b({.schema = "IFC2X3", .lat_long = std::pair{51.91, 4.49}, .project_name = "Tower"});
  int top = 0;
  for (std::size_t i = 0; i < kProfile.size(); ++i) {
    const double z = static_cast<double>(i) * kFloor;
    top = b.storey(kNames[i], z);
    b.shell(top, 0, 0, kGroundW, kGroundD * kProfile[i] / 100.0, z, kFloor);
  }
  const double z_top = static_cast<double>(kProfile.size() - 1) * kFloor + kFloor;
  b.box(top, "IFCBUILDINGELEMENTPROXY", "Roof installation", 20, 5, z_top, 4, 4, kRoofTop - z_top);
  return b.str();
}

std::string overhang_file() {
  using namespace overhang;
  IfcBuilder b({.project_name = "Overhang"});
  for (int i = 0; i <= 28; ++i) {
    const double z = i * 3.0;
    const int s = b.storey(ordinal(i), z);
    b.shell(s, 0, 0, kW, kD, z, 3.0);
    if (i == 27) b.box(s, "IFCSLAB", "Cantilever north", 0, kD, z, kW, kNorth, 3.0);
    if (i == 12) b.box(s, "IFCSLAB", "Cantilever south", 0, -kSouth, z, kW, kSouth, 3.0);
  }
  return b.str();
}

std::string ceiling_file() {
  IfcBuilder b({.project_name = "Ceiling"});
  const int g = b.storey("ground", 0.0);
  b.shell(g, 0, 0, 20, 20, 0.0, 3.0);
  const int s25 = b.storey("25th", 78.47);
  b.shell(s25, 0, 0, 20, 20, 78.47, 2.55);
  const int s26 = b.storey("26th", 81.61);
  b.box(s26, "IFCSLAB", "Ceiling ensemble", 0, 0, 81.02, 20, 20, 0.59);
  b.shell(s26, 0, 0, 20, 20, 81.61, 3.0);
  return b.str();
}

std::string parking_file() {
  IfcBuilder b({.project_name = "Parking"});
  const int b2 = b.storey("-2", -6.0);
  const int b1 = b.storey("-1", -3.0);
  const int g = b.storey("ground", 0.0);
  b.shell(b2, 0, 0, 40, 30, -6.0, 3.0);
  b.shell(b1, 0, 0, 40, 30, -3.0, 3.0);
  b.shell(g, 0, 0, 40, 30, 0.0, 3.0);
  auto spots = [&](int storey, double z, int count) {
    for (int i = 0; i < count; ++i) {
      const int row = i / 14, col = i % 14;
      const int p = b.box(storey, "IFCBUILDINGELEMENTPROXY", "P" + std::to_string(i + 1), 1 + col * 2.6, 2 + row * 6,
                          z + 0.2, 2.5, 5, 0.02);
      b.property(p, "Pset_ProductRequirements", "Category", i % 2 ? "Parking" : "PARKING");
    }
  };
  spots(b2, -6.0, 30);
  spots(b1, -3.0, 27);
  b.space(g, "Fietsenstalling 01", 1, 1, 0.2, 10, 8, 2.8);
  b.space(g, "Entree", 12, 1, 0.2, 6, 8, 2.8);
  return b.str();
}

std::string georef_file(int level) {
  BuilderOptions o{.lat_long = std::pair{51.9, 4.48}, .project_name = "Georef"};
  if (level >= 30) o.site_origin = Eigen::Vector3d(1000, 2000, 0);
  if (level == 31) o.true_north = Eigen::Vector2d(1, 0);
  if (level == 32) o.true_north = Eigen::Vector2d(0, 1);
  if (level == 50) o.map_conversion = true;
  IfcBuilder b(o);
  const int s = b.storey("ground", 0.0);
  b.shell(s, 0, 0, 10, 10, 0.0, 3.0);
  return b.str();
}

std::string frame_file(double shift) {
  IfcBuilder b({.site_origin = Eigen::Vector3d(1000 + shift, 2000, 0), .project_name = "Frame"});
  const int s = b.storey("ground", 0.0);
  b.shell(s, 0, 0, 10, 10, 0.0, 3.0);
  return b.str();
}

std::string repair_file() {
  IfcBuilder b({.project_name = "Repair"});
  const int s0 = b.storey("00", 0.0);
  const int s1 = b.storey("01", 3.0);
  const int s2 = b.storey("02", 6.0);
  const int phantom = b.storey("02a", 7.5);
  b.shell(s0, 0, 0, 20, 20, 0.0, 3.0);
  b.shell(s1, 0, 0, 20, 20, 3.0, 3.0);
  b.shell(s2, 0, 0, 20, 20, 6.0, 3.0);
  // Authored in the ground storey but located on 02.
  b.box(s0, "IFCWALL", "Misplaced wall", 5, 5, 6.2, 4, 0.2, 2.8);
  // Runs the full height of the building.
  b.box(s0, "IFCCOLUMN", "Full-height column", 10, 10, 0.0, 0.4, 0.4, 9.0);
  // Contained twice; its geometry belongs to 01.
  const int dup = b.box(s1, "IFCSLAB", "Landing", 2, 2, 3.0, 2, 2, 0.2);
  b.also_contain(dup, s2);
  // Phantom storey with two elements.
  b.box(phantom, "IFCMEMBER", "Mezzanine rail", 1, 1, 7.5, 3, 0.1, 1.0);
  b.box(phantom, "IFCMEMBER", "Mezzanine post", 1, 1, 7.5, 0.1, 0.1, 1.0);
  // Site furniture contained in the site, outside the building.
  b.box(b.site(), "IFCBUILDINGELEMENTPROXY", "Bench", 200, 0, 0, 2, 0.5, 0.5);
  return b.str();
}

std::string lint_file() {
  IfcBuilder b({.project_name = "Lint"});
  const int s = b.storey("ground", 0.0);
  b.shell(s, 0, 0, 20, 20, 0.0, 3.0);
  b.box(s, "IFCWALL", "Partition", 10, 0.3, 0.2, 0.1, 19.4, 2.8);
  b.box(s, "IFCWALL", "Partition", 5, 0.3, 0.2, 0.1, 19.4, 2.8);
  for (int i = 0; i < 3; ++i)
    b.box(s, "IFCBUILDINGELEMENTPROXY", "Box " + std::to_string(i), 2 + i * 2.5, 2, 0.2, 1, 1, 1);
  b.space(s, "Woonkamer", 0.3, 0.3, 0.2, 4.7, 19.4, 2.6);
  b.space(s, "Living", 0.3, 0.3, 0.2, 4.7, 19.4, 2.6);
  return b.str();
}

std::string zoo_file() {
  IfcBuilder b({.project_name = "Zoo"});
  const int s = b.storey("ground", 0.0);
  b.triangulated_box(s, "Triangulated", 0, 0, 0, 1, 1, 1);
  b.polygonal_box(s, "Polygonal", 2, 0, 0, 1, 2, 1);
  b.mapped_box(s, "Mapped", 4, 0, 0, 1, 1, 2);
  b.cylinder(s, "Round column", 7, 0.5, 0, 0.5, 3);
  b.clipped_box(s, "Clipped", 9, 0, 0, 1, 1, 3);
  b.brep_box(s, "Brep", 11, 0, 0, 2, 1, 1);
  b.l_prism(s, "L slab", 0, 5, 0, 10, 8, 4, 3, 0.3);
  b.curve_only(s, "Axis only");
  return b.str();
}

std::string box_file(bool annex) {
  IfcBuilder b({.project_name = annex ? "Annex" : "Box"});
  const int s = b.storey("ground", 0.0);
  b.shell(s, 0, 0, 20, 30, 0.0, 3.0);
  if (annex) b.shell(s, 40, 0, 5, 5, 0.0, 3.0);
  return b.str();
}

std::string balcony_file() {
  IfcBuilder b({.project_name = "Balcony"});
  const int s0 = b.storey("ground", 0.0);
  b.shell(s0, 0, 0, 20, 30, 0.0, 3.0);
  const int s1 = b.storey("1st", 3.0);
  b.shell(s1, 0, 0, 20, 30, 3.0, 3.0);
  // Balcony slab with a 1.1 m parapet, 2 m deep along the south facade.
  b.box(s1, "IFCSLAB", "Balcony", 0, -2, 3.0, 20, 2, 0.3);
  b.box(s1, "IFCRAILING", "Parapet", 0, -2, 3.3, 20, 0.1, 1.1);
  return b.str();
}

std::string uniform_file() {
  IfcBuilder b({.project_name = "Uniform"});
  for (int i = 0; i < 8; ++i) {
    const int s = b.storey(ordinal(i), i * 3.0);
    b.shell(s, 0, 0, 20, 20, i * 3.0, 3.0);
  }
  return b.str();
}

std::string top60_file() {
  IfcBuilder b({.project_name = "Top sixty"});
  for (int i = 0; i < 6; ++i) {
    const int s = b.storey(ordinal(i), i * 3.0);
    if (i < 2) b.shell(s, 0, 0, 30, 20, i * 3.0, 3.0);
    else b.shell(s, 0, 0, 18, 20, i * 3.0, 3.0);
  }
  return b.str();
}

// Uniform slab block with a mast reaching `top` meters.
std::string mast_file(double top) {
  IfcBuilder b({.project_name = "Mast"});
  for (int i = 0; i < 4; ++i) {
    const int s = b.storey(ordinal(i), i * 3.0);
    b.shell(s, 0, 0, 20, 20, i * 3.0, 3.0);
    if (i == 3) b.box(s, "IFCBUILDINGELEMENTPROXY", "Mast", 9, 9, 12.0, 2, 2, top - 12.0);
  }
  return b.str();
}

const std::map<std::string, std::function<std::string()>>& generators() {
  static const std::map<std::string, std::function<std::string()>> g{
      {"minimal.ifc", [] { return std::string(kMinimal); }},
      {"dangling.ifc", [] { return std::string(kDangling); }},
      {"stepped.ifc", [] { return stepped_file(1.0); }},
      {"stepped_mm.ifc", [] { return stepped_file(0.001); }},
      {"stepped_arch.ifc", [] { return stepped_part(true); }},
      {"stepped_struct.ifc", [] { return stepped_part(false); }},
      {"tower.ifc", tower_file},
      {"overhang.ifc", overhang_file},
      {"ceiling.ifc", ceiling_file},
      {"parking.ifc", parking_file},
      {"georef_l20.ifc", [] { return georef_file(20); }},
      {"georef_l30.ifc", [] { return georef_file(30); }},
      {"georef_north.ifc", [] { return georef_file(31); }},
      {"georef_north_identity.ifc", [] { return georef_file(32); }},
      {"georef_l50.ifc", [] { return georef_file(50); }},
      {"frame_a.ifc", [] { return frame_file(0.0); }},
      {"frame_b.ifc", [] { return frame_file(5.0); }},
      {"repair.ifc", repair_file},
      {"lint.ifc", lint_file},
      {"zoo.ifc", zoo_file},
      {"box.ifc", [] { return box_file(false); }},
      {"annex.ifc", [] { return box_file(true); }},
      {"balcony.ifc", balcony_file},
      {"uniform.ifc", uniform_file},
      {"top60.ifc", top60_file},
      {"mast120.ifc", [] { return mast_file(120.0); }},
  };
  return g;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> all_fixtures() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, gen] : generators()) out.emplace_back(name, gen());
  return out;
}

std::string fixture_text(const std::string& name) {
  auto it = generators().find(name);
  if (it == generators().end()) throw std::out_of_range("unknown fixture " + name);
  return it->second();
}

}  // namespace fixture
