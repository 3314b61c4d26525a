#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "geobim/digest.hpp"
#include "geobim/ifc.hpp"
#include "geobim/service.hpp"

namespace geobim {

InputFile read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {std::filesystem::path(path).filename().string(), ss.str()};
}

FederatedModel load_models(const std::vector<InputFile>& files, const FederateOptions& options) {
  if (files.empty()) throw Error(ErrorCode::InvalidParams, "no model files given");
  std::vector<std::future<std::shared_ptr<const IfcGraph>>> parsing;
  for (const auto& f : files)
    parsing.push_back(std::async(std::launch::async, [&f] { return std::make_shared<const IfcGraph>(load_ifc(f.bytes)); }));
  std::vector<std::shared_ptr<const IfcGraph>> graphs;
  std::vector<std::string> names, digests;
  for (std::size_t i = 0; i < files.size(); ++i) {
    graphs.push_back(parsing[i].get());
    names.push_back(files[i].name);
    digests.push_back(sha256_hex(files[i].bytes));
  }
  auto model = federate(std::move(graphs), options, std::move(names));
  model.fingerprints = std::move(digests);
  return model;
}

std::string model_fingerprint(const FederatedModel& model) {
  std::string joined;
  for (const auto& f : model.fingerprints) joined += f + "\n";
  return sha256_hex(joined);
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams:
    case ErrorCode::UnknownStorey:
      return 400;
    case ErrorCode::Io:
      return 500;
    default:
      return 422;
  }
}

}  // namespace geobim
