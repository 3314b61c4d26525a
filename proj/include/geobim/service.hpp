#pragma once

// Model loading shared by the CLI and the HTTP service, and the HTTP service itself.

#include <memory>
#include <string>
#include <vector>

#include "geobim/config.hpp"
#include "geobim/error.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

struct InputFile {
  std::string name;   // base name reported in JSON bodies
  std::string bytes;
};

/// Reads a file from disk; the reported name is the path's base name. Throws Error{Io}.
InputFile read_input(const std::string& path);

/// Parse and federate; fingerprints filled, no storey repair yet.
FederatedModel load_models(const std::vector<InputFile>& files, const FederateOptions& options = {});

/// Digest over the per-file fingerprints in order.
std::string model_fingerprint(const FederatedModel& model);

/// HTTP status for a module error: 400 for caller mistakes, 422 for model defects.
int http_status(ErrorCode code);

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_upload_bytes = 256u << 20;
  double inline_seconds = 2.0;  // footprint work beyond this returns 202 and a job token
  std::string cors_origin = "*";
  Settings defaults;
};

/// GEOBIM_PORT, GEOBIM_MAX_UPLOAD (bytes), GEOBIM_HOST and GEOBIM_CORS_ORIGIN override `base`.
ServiceOptions service_options_from_env(ServiceOptions base = {});

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound port or -1.
  int bind();
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace geobim
