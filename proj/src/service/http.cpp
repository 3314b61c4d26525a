#include <chrono>
#include <cstdlib>
#include <future>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <shared_mutex>

#include "geobim/digest.hpp"
#include "geobim/export.hpp"
#include "geobim/service.hpp"

// after Eigen: <resolv.h> defines _res, an Eigen parameter name
#include <httplib.h>

namespace geobim {

namespace {

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using FootprintFuture = std::shared_future<std::shared_ptr<const FootprintSet>>;

struct Session {
  std::string id;
  FederatedModel raw;
  std::string fingerprint;
  std::chrono::system_clock::time_point created;

  std::mutex mu;
  std::map<std::string, std::shared_ptr<const FederatedModel>> repaired;  // by repair hash
  std::map<std::string, FootprintFuture> footprints;                     // by repair hash + footprint hash
};

Reply json_reply(int status, const Json& body) { return {status, dump(body), "application/json"}; }

Reply error_reply(const Error& e) {
  return json_reply(http_status(e.code()), error_json(std::string(to_string(e.code())), e.what(), e.detail()));
}

/// Runs `fn`, mapping module errors and malformed JSON onto error bodies.
template <class Fn>
Reply guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const nlohmann::json::exception& e) {
    return json_reply(400, error_json("InvalidJson", "malformed JSON body", e.what()));
  } catch (const std::exception& e) {
    return json_reply(500, error_json("Internal", e.what()));
  }
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json body = Json::parse(req.body);
  if (!body.is_object()) throw Error(ErrorCode::InvalidParams, "request body must be a JSON object");
  return body;
}

std::string random_token() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::size_t storey_ref(const FederatedModel& model, const Json& v) {
  if (v.is_number_unsigned()) {
    auto i = v.get<std::size_t>();
    if (i >= model.storeys.size()) throw Error(ErrorCode::UnknownStorey, "storey index out of range", v.dump());
    return i;
  }
  if (v.is_string()) return find_storey(model, v.get<std::string>());
  throw Error(ErrorCode::InvalidParams, "storey reference must be a name or an index", v.dump());
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  int port = -1;

  mutable std::shared_mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex jobs_mu;
  std::map<std::string, std::shared_future<Reply>> jobs;

  explicit Impl(ServiceOptions o) : options(std::move(o)) { routes(); }

  // -------------------------------------------------------------------------

  std::shared_ptr<Session> session(const httplib::Request& req) {
    std::shared_lock lock(sessions_mu);
    auto it = sessions.find(req.path_params.at("id"));
    if (it == sessions.end()) return nullptr;
    return it->second;
  }

  Settings settings_from(const Json& body) const {
    Settings s = options.defaults;
    apply_json(s, body);
    return s;
  }

  /// GET requests carry footprint and repair keys in the query string.
  Settings settings_from(const httplib::Request& req) const {
    Settings s = options.defaults;
    static const std::set<std::string> footprint_keys{"cut_offset", "sample_spacing", "dbscan_eps", "dbscan_min_pts",
                                                      "hull_k"};
    static const std::set<std::string> repair_keys{"elev_buffer", "min_elements"};
    static const std::set<std::string> other_keys{"frame", "format", "reference_storey"};
    for (const auto& [key, value] : req.params) {
      if (footprint_keys.count(key)) set_option(s, "footprint", key, value);
      else if (repair_keys.count(key)) set_option(s, "repair", key, value);
      else if (!other_keys.count(key)) throw Error(ErrorCode::InvalidParams, "unknown query parameter", key);
    }
    s.validate();
    return s;
  }

  std::shared_ptr<const FederatedModel> repaired(Session& s, const RepairParams& params) {
    const std::string key = parameter_hash(params);
    {
      std::lock_guard lock(s.mu);
      if (auto it = s.repaired.find(key); it != s.repaired.end()) return it->second;
    }
    auto model = std::make_shared<const FederatedModel>(repair_storeys(s.raw, params));
    std::lock_guard lock(s.mu);
    return s.repaired.emplace(key, std::move(model)).first->second;
  }

  FootprintFuture footprints(Session& s, std::shared_ptr<const FederatedModel> model, const Settings& settings,
                             bool* hit) {
    const std::string key = parameter_hash(settings.repair) + ":" + parameter_hash(settings.footprint);
    std::lock_guard lock(s.mu);
    if (auto it = s.footprints.find(key); it != s.footprints.end()) {
      *hit = true;
      return it->second;
    }
    *hit = false;
    const FootprintParams params = settings.footprint;
    FootprintFuture f = std::async(std::launch::async, [model, params] {
                          return std::make_shared<const FootprintSet>(compute_footprints(*model, params));
                        }).share();
    s.footprints.emplace(key, f);
    return f;
  }

  /// Replies inline when the footprints are ready within the inline budget, else registers a job.
  Reply inline_or_job(FootprintFuture f, std::function<Reply(const FootprintSet&)> build) {
    auto finish = [f, build]() -> Reply { return guarded([&] { return build(*f.get()); }); };
    const auto budget = std::chrono::duration<double>(options.inline_seconds);
    if (f.wait_for(budget) == std::future_status::ready) return finish();
    const std::string token = random_token();
    {
      std::lock_guard lock(jobs_mu);
      jobs.emplace(token, std::async(std::launch::async, finish).share());
    }
    Json j;
    j["job"] = token;
    j["status"] = "running";
    j["poll"] = "/jobs/" + token;
    return json_reply(202, j);
  }

  // -------------------------------------------------------------------------

  Reply create_session(const httplib::Request& req) {
    std::vector<InputFile> files;
    if (req.is_multipart_form_data()) {
      for (const auto& [field, part] : req.files)
        if (!part.filename.empty() || field == "file") files.push_back({part.filename.empty() ? field : part.filename, part.content});
    } else if (!req.body.empty()) {
      files.push_back({req.has_param("name") ? req.get_param_value("name") : "model.ifc", req.body});
    }
    if (files.empty()) throw Error(ErrorCode::InvalidParams, "upload one or more IFC files");

    Settings settings = options.defaults;
    if (req.has_param("ground_storey")) set_option(settings, "model", "ground_storey", req.get_param_value("ground_storey"));
    if (req.has_param("allow_frame_mismatch"))
      set_option(settings, "model", "allow_frame_mismatch", req.get_param_value("allow_frame_mismatch"));

    auto s = std::make_shared<Session>();
    s->raw = load_models(files, settings.federate);
    s->fingerprint = model_fingerprint(s->raw);
    s->created = std::chrono::system_clock::now();
    s->id = random_token();
    repaired(*s, settings.repair);  // warm the default grouping

    Json j = summary(*s);
    {
      std::unique_lock lock(sessions_mu);
      sessions.emplace(s->id, s);
    }
    return json_reply(201, j);
  }

  Json summary(const Session& s) const {
    Json j;
    j["id"] = s.id;
    Json files = Json::array();
    for (std::size_t i = 0; i < s.raw.file_names.size(); ++i)
      files.push_back({{"file", s.raw.file_names[i]}, {"fingerprint", s.raw.fingerprints[i]}});
    j["files"] = std::move(files);
    j["fingerprint"] = s.fingerprint;
    j["storey_count"] = s.raw.storeys.size();
    j["element_count"] = s.raw.element_count();
    j["warnings"] = s.raw.warnings;
    return j;
  }

  template <class Fn>
  void on_session(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    Reply r = guarded([&]() -> Reply {
      auto s = session(req);
      if (!s) return json_reply(404, error_json("UnknownSession", "no such model session", req.path_params.at("id")));
      return fn(*s);
    });
    send(res, r);
  }

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  }

  void routes() {
    httplib::Headers cors{{"Access-Control-Allow-Origin", options.cors_origin},
                          {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                          {"Access-Control-Allow-Headers", "Content-Type"}};
    server.set_default_headers(cors);
    server.set_payload_max_length(options.max_upload_bytes);
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send(res, json_reply(200, Json{{"status", "ok"}}));
    });

    server.Post("/models", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, guarded([&] { return create_session(req); }));
    });

    server.Get("/models/:id", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) { return json_reply(200, summary(s)); });
    });

    server.Delete("/models/:id", [this](const httplib::Request& req, httplib::Response& res) {
      Reply r = guarded([&] {
        const std::string id = req.path_params.at("id");
        std::unique_lock lock(sessions_mu);
        if (!sessions.erase(id)) return json_reply(404, error_json("UnknownSession", "no such model session", id));
        return json_reply(200, Json{{"deleted", id}});
      });
      send(res, r);
    });

    server.Get("/models/:id/storeys", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        auto model = repaired(s, settings_from(req).repair);
        return json_reply(200, storeys_json(*model));
      });
    });

    server.Post("/models/:id/footprints", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Settings settings = settings_from(parse_body(req));
        bool hit = false;
        auto f = footprints(s, repaired(s, settings.repair), settings, &hit);
        res.set_header("X-Cache", hit ? "hit" : "miss");
        return inline_or_job(f, [](const FootprintSet& fs) { return json_reply(200, footprints_json(fs)); });
      });
    });

    server.Post("/models/:id/overlaps", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Json body = parse_body(req);
        const Settings settings = settings_from(body);
        auto model = repaired(s, settings.repair);
        const std::size_t ref = storey_ref(*model, body.value("reference_storey", Json("ground")));
        bool hit = false;
        auto f = footprints(s, model, settings, &hit);
        res.set_header("X-Cache", hit ? "hit" : "miss");
        return inline_or_job(f, [ref](const FootprintSet& fs) { return json_reply(200, overlaps_json(overlap_table(fs, ref))); });
      });
    });

    server.Post("/models/:id/overhang", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Json body = parse_body(req);
        Settings settings = settings_from(body);
        if (body.contains("lines")) {
          Json wrapped{{"regulation", {{"overhang_lines", body["lines"]}}}};
          apply_json(settings, wrapped);
        }
        if (settings.regulation.overhang_lines.empty())
          throw Error(ErrorCode::InvalidParams, "at least one overhang line is required");
        auto model = repaired(s, settings.repair);
        std::vector<std::size_t> targets;
        if (body.contains("target_storeys")) {
          if (!body["target_storeys"].is_array()) throw Error(ErrorCode::InvalidParams, "target_storeys must be an array");
          for (const auto& t : body["target_storeys"]) targets.push_back(storey_ref(*model, t));
        }
        auto results = overhang_distances(*model, targets, settings.regulation.overhang_lines, settings.regulation);
        Json j;
        j["verdict"] = std::string(to_string(check_overhang(*model, results).verdict));
        j["lines"] = overhang_json(*model, results);
        return json_reply(200, j);
      });
    });

    server.Post("/models/:id/checks", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Settings settings = settings_from(parse_body(req));
        auto model = repaired(s, settings.repair);
        bool hit = false;
        auto f = footprints(s, model, settings, &hit);
        res.set_header("X-Cache", hit ? "hit" : "miss");
        return inline_or_job(f, [model, settings](const FootprintSet& fs) {
          return json_reply(200, report_json(run_checks(*model, settings.footprint, settings.regulation, settings.repair, fs)));
        });
      });
    });

    server.Get("/models/:id/lint", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Settings settings = settings_from(req);
        return json_reply(200, findings_json(lint_model(*repaired(s, settings.repair), settings.regulation)));
      });
    });

    server.Get("/models/:id/export/wkt", [this](const httplib::Request& req, httplib::Response& res) {
      on_session(req, res, [&](Session& s) {
        const Settings settings = settings_from(req);
        const Frame frame = parse_frame(req.has_param("frame") ? req.get_param_value("frame") : "model-local");
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
        if (format != "json" && format != "csv") throw Error(ErrorCode::InvalidParams, "format must be json or csv", format);
        auto model = repaired(s, settings.repair);
        bool hit = false;
        auto fs = footprints(s, model, settings, &hit).get();
        auto records = to_wkt(*fs, model->graphs.front()->georef, frame, model->storeys.at(model->ground_storey).elevation +
                                                                             max_height(*model));
        if (format == "csv") return Reply{200, wkt_csv(records), "text/csv"};
        return json_reply(200, wkt_json(records));
      });
    });

    server.Get("/jobs/:token", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string token = req.path_params.at("token");
      std::shared_future<Reply> job;
      {
        std::lock_guard lock(jobs_mu);
        auto it = jobs.find(token);
        if (it != jobs.end()) job = it->second;
      }
      if (!job.valid()) return send(res, json_reply(404, error_json("UnknownJob", "no such job", token)));
      if (job.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
        Json j;
        j["job"] = token;
        j["status"] = "running";
        j["poll"] = "/jobs/" + token;
        return send(res, json_reply(202, j));
      }
      send(res, job.get());
    });
  }
};

ServiceOptions service_options_from_env(ServiceOptions base) {
  auto parse_number = [](const char* name, const char* text) -> unsigned long long {
    char* end = nullptr;
    unsigned long long v = std::strtoull(text, &end, 10);
    if (!*text || *end) throw Error(ErrorCode::InvalidParams, std::string(name) + " must be an integer", text);
    return v;
  };
  if (const char* p = std::getenv("GEOBIM_PORT"); p && *p) {
    auto v = parse_number("GEOBIM_PORT", p);
    if (v > 65535) throw Error(ErrorCode::InvalidParams, "GEOBIM_PORT out of range", p);
    base.port = static_cast<int>(v);
  }
  if (const char* p = std::getenv("GEOBIM_MAX_UPLOAD"); p && *p) base.max_upload_bytes = parse_number("GEOBIM_MAX_UPLOAD", p);
  if (const char* p = std::getenv("GEOBIM_HOST"); p && *p) base.host = p;
  if (const char* p = std::getenv("GEOBIM_CORS_ORIGIN"); p && *p) base.cors_origin = p;
  return base;
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() { stop(); }

int Service::bind() {
  auto& s = impl_->server;
  if (impl_->options.port == 0) impl_->port = s.bind_to_any_port(impl_->options.host);
  else impl_->port = s.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
  return impl_->port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

}  // namespace geobim
