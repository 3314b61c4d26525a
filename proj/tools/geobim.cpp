// geobim: IFC footprints and permit dimension checks from the command line.
//
// exit codes: 0 pass, 2 any fail verdict, 3 needs-review only, 1 processing error, 64 usage error

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "geobim/config.hpp"
#include "geobim/digest.hpp"
#include "geobim/export.hpp"
#include "geobim/ifc.hpp"
#include "geobim/service.hpp"

using namespace geobim;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;
constexpr int kExitReview = 3;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Args {
  std::vector<std::string> models;
  std::string config;
  std::string reference_storey = "ground";
  std::optional<double> cut_offset, eps;
  std::optional<std::size_t> min_pts, hull_k;
  std::vector<std::string> lines;
  std::vector<std::string> storeys;
  std::string out_dir;
  std::string format;
  std::string frame = "model-local";
  std::string obj;
  std::string ground_storey;
  bool allow_frame_mismatch = false;
  std::string host = "127.0.0.1";
  std::optional<int> port;
};

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitPass;
    case Verdict::Fail: return kExitFail;
    case Verdict::NeedsReview: return kExitReview;
  }
  return kExitError;
}

Settings resolve_settings(const Args& a) {
  Settings s = a.config.empty() ? Settings{} : load_config_file(a.config);
  if (a.cut_offset) s.footprint.cut_offset = *a.cut_offset;
  if (a.eps) s.footprint.dbscan_eps = *a.eps;
  if (a.min_pts) s.footprint.dbscan_min_pts = *a.min_pts;
  if (a.hull_k) s.footprint.hull_k = *a.hull_k;
  if (!a.lines.empty()) {
    s.regulation.overhang_lines.clear();
    for (const auto& l : a.lines) s.regulation.overhang_lines.push_back(OverhangLine::parse(l));
  }
  if (!a.ground_storey.empty()) s.federate.ground_storey = a.ground_storey;
  if (a.allow_frame_mismatch) s.federate.allow_frame_mismatch = true;
  s.validate();
  return s;
}

FederatedModel load(const Args& a, const Settings& s) {
  std::vector<InputFile> files;
  for (const auto& m : a.models) files.push_back(read_input(m));
  return repair_storeys(load_models(files, s.federate), s.repair);
}

std::string stem(const Args& a) { return fs::path(a.models.front()).stem().string(); }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string(), path.string());
}

void require_format(const std::string& f, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (f == a) return;
  throw UsageError("--format '" + f + "' is not supported by this subcommand");
}

// -------------------------------------------------------------------------

int cmd_parse(const Args& a) {
  const Settings s = resolve_settings(a);
  Json out = Json::array();
  std::vector<InputFile> files;
  for (const auto& m : a.models) files.push_back(read_input(m));
  for (const auto& f : files) {
    const IfcGraph g = load_ifc(f.bytes);
    std::map<std::string, std::size_t> classes;
    for (const auto& [id, inst] : g.instances) ++classes[inst.ifc_class];
    Json j;
    j["file"] = f.name;
    j["fingerprint"] = sha256_hex(f.bytes);
    j["schema"] = g.schema_id;
    j["instance_count"] = g.instances.size();
    j["length_to_meters"] = g.length_to_meters;
    j["logeoref_level"] = std::string(to_string(g.georef.logeoref_level));
    j["products"] = product_elements(g).size();
    j["storeys"] = classes["IFCBUILDINGSTOREY"];
    j["warnings"] = g.warnings;
    out.push_back(std::move(j));
  }
  if (!a.obj.empty()) {
    auto model = load(a, s);
    std::vector<Mesh> meshes;
    for (const auto* m : model.solid_meshes()) meshes.push_back(*m);
    fs::path p = a.obj;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream obj(p, std::ios::binary);
    if (!obj) throw Error(ErrorCode::Io, "cannot write " + a.obj, a.obj);
    write_obj(obj, meshes);
  }
  std::cout << dump(out);
  return kExitPass;
}

int cmd_storeys(const Args& a) {
  require_format(a.format.empty() ? "json" : a.format, {"json", "text"});
  const Settings s = resolve_settings(a);
  auto model = load(a, s);
  if (a.format == "text") {
    for (std::size_t i = 0; i < model.storeys.size(); ++i) {
      const auto& st = model.storeys[i];
      std::printf("%-3zu %-24s %10.3f %6zu%s\n", i, st.name.c_str(), st.elevation, st.element_ids.size(),
                  i == model.ground_storey ? "  ground" : "");
    }
  } else {
    std::cout << dump(storeys_json(model));
  }
  return kExitPass;
}

int cmd_footprints(const Args& a) {
  require_format(a.format.empty() ? "json" : a.format, {"json"});
  const Settings s = resolve_settings(a);
  auto model = load(a, s);
  const std::string body = dump(footprints_json(compute_footprints(model, s.footprint)));
  if (!a.out_dir.empty()) write_file(fs::path(a.out_dir) / (stem(a) + "_footprints.json"), body);
  std::cout << body;
  return kExitPass;
}

int cmd_overlaps(const Args& a) {
  const std::string format = a.format.empty() ? "csv" : a.format;
  require_format(format, {"csv", "json"});
  const Settings s = resolve_settings(a);
  auto model = load(a, s);
  const auto ref = find_storey(model, a.reference_storey);
  auto set = overlap_table(compute_footprints(model, s.footprint), ref);
  const std::string csv = overlaps_csv(set);
  if (!a.out_dir.empty()) write_file(fs::path(a.out_dir) / (stem(a) + "_overlaps.csv"), csv);
  std::cout << (format == "csv" ? csv : dump(overlaps_json(set)));
  return kExitPass;
}

int cmd_overhang(const Args& a) {
  require_format(a.format.empty() ? "json" : a.format, {"json"});
  const Settings s = resolve_settings(a);
  if (s.regulation.overhang_lines.empty()) throw UsageError("overhang needs at least one --line (or [overhang] lines in --config)");
  auto model = load(a, s);
  std::vector<std::size_t> targets;
  for (const auto& t : a.storeys) targets.push_back(find_storey(model, t));
  auto results = overhang_distances(model, targets, s.regulation.overhang_lines, s.regulation);
  const auto entry = check_overhang(model, results);
  Json j;
  j["verdict"] = std::string(to_string(entry.verdict));
  j["lines"] = overhang_json(model, results);
  const std::string body = dump(j);
  if (!a.out_dir.empty()) write_file(fs::path(a.out_dir) / (stem(a) + "_overhang.json"), body);
  std::cout << body;
  return verdict_exit(entry.verdict);
}

int cmd_check(const Args& a) {
  const std::string format = a.format.empty() ? "text" : a.format;
  require_format(format, {"text", "json", "csv"});
  const Settings s = resolve_settings(a);
  auto model = load(a, s);
  auto report = run_checks(model, s.footprint, s.regulation, s.repair);
  const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  const std::string body = dump(report_json(report));
  write_file(dir / (stem(a) + "_report.json"), body);
  write_file(dir / (stem(a) + "_overlaps.csv"), overlaps_csv(report.footprints));
  write_file(dir / (stem(a) + "_verdicts.csv"), verdicts_csv(report));
  if (format == "json") {
    std::cout << body;
  } else if (format == "csv") {
    std::cout << verdicts_csv(report);
  } else {
    for (const auto& e : report.entries) std::cout << e.rule << ": " << to_string(e.verdict) << "\n";
    for (const auto& f : report.findings) std::cout << f.code << ": " << f.message << "\n";
    std::cout << "overall: " << to_string(report.overall()) << "\n";
  }
  return verdict_exit(report.overall());
}

int cmd_lint(const Args& a) {
  require_format(a.format.empty() ? "json" : a.format, {"json", "text"});
  const Settings s = resolve_settings(a);
  auto model = load(a, s);
  auto findings = lint_model(model, s.regulation);
  if (a.format == "text") {
    for (const auto& f : findings) std::cout << f.code << ": " << f.message << " (" << f.evidence.size() << " items)\n";
  } else {
    std::cout << dump(findings_json(findings));
  }
  return kExitPass;
}

int cmd_export_wkt(const Args& a) {
  const std::string format = a.format.empty() ? "csv" : a.format;
  require_format(format, {"csv", "json"});
  const Settings s = resolve_settings(a);
  const Frame frame = parse_frame(a.frame);
  auto model = load(a, s);
  auto set = compute_footprints(model, s.footprint);
  const double top = model.storeys[model.ground_storey].elevation + max_height(model);
  auto records = to_wkt(set, model.graphs.front()->georef, frame, top);
  const std::string csv = wkt_csv(records);
  const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  write_file(dir / (stem(a) + "_footprints.wkt.csv"), csv);
  std::cout << (format == "csv" ? csv : dump(wkt_json(records)));
  return kExitPass;
}

std::atomic<Service*> g_service{nullptr};

int cmd_serve(const Args& a) {
  ServiceOptions o;
  o.host = a.host;
  o = service_options_from_env(o);
  if (a.port) o.port = *a.port;
  o.defaults = a.config.empty() ? Settings{} : load_config_file(a.config);
  Service service(o);
  const int port = service.bind();
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  std::cout << "listening on http://" << o.host << ":" << port << std::endl;
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (auto* s = g_service.load()) s->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (auto* s = g_service.load()) s->stop();
  });
  service.run();
  g_service = nullptr;
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IFC storey footprints and building permit dimension checks"};
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* sub, bool needs_model = true) {
    auto* m = sub->add_option("--model,-m", a.models, "IFC file; repeat to federate discipline files");
    if (needs_model) m->required();
    sub->add_option("--config,-c", a.config, "INI configuration file");
    sub->add_option("--cut-offset", a.cut_offset, "cut height above storey elevation (m)");
    sub->add_option("--eps", a.eps, "DBSCAN radius (m)");
    sub->add_option("--min-pts", a.min_pts, "DBSCAN minimum neighbourhood size");
    sub->add_option("--hull-k", a.hull_k, "concave hull neighbour count");
    sub->add_option("--reference-storey", a.reference_storey, "overlap reference: ground, a storey name or an index");
    sub->add_option("--line", a.lines, "overhang line x1,y1,x2,y2,side,label,limit (repeatable)");
    sub->add_option("--out-dir,-o", a.out_dir, "directory for written artifacts");
    sub->add_option("--format,-f", a.format, "output format: json, csv or text");
    sub->add_option("--ground-storey", a.ground_storey, "name of the ground storey");
    sub->add_flag("--allow-frame-mismatch", a.allow_frame_mismatch, "federate files whose site origins disagree");
  };

  std::map<CLI::App*, int (*)(const Args&)> commands;
  auto add = [&](const char* name, const char* help, int (*fn)(const Args&)) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    commands[sub] = fn;
    return sub;
  };
  auto* parse = add("parse", "parse files and print a summary", cmd_parse);
  parse->add_option("--obj", a.obj, "write tessellated solid geometry as OBJ");
  add("storeys", "storeys after repair", cmd_storeys);
  add("footprints", "storey footprint polygons", cmd_footprints);
  add("overlaps", "overlap table against a reference storey", cmd_overlaps);
  auto* overhang = add("overhang", "street-side overhang distances", cmd_overhang);
  overhang->add_option("--storey", a.storeys, "target storey (repeatable; default all)");
  add("check", "run every rule and write the report", cmd_check);
  add("lint", "model quality findings", cmd_lint);
  auto* wkt = add("export-wkt", "footprints as WKT", cmd_export_wkt);
  wkt->add_option("--frame", a.frame, "model-local or site-projected");
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--config,-c", a.config, "INI configuration file with default parameters");
  serve->add_option("--host", a.host, "listen address");
  serve->add_option("--port,-p", a.port, "listen port (default GEOBIM_PORT or 8080)");
  commands[serve] = cmd_serve;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (auto& [sub, fn] : commands)
      if (sub->parsed()) return fn(a);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
