#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "geobim/ifc.hpp"
#include "geobim/storey_model.hpp"

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_path(const std::string& name) { return std::string(GEOBIM_FIXTURE_DIR) + "/" + name; }

inline std::shared_ptr<const geobim::IfcGraph> graph(const std::string& name, geobim::ParseOptions opt = {}) {
  return std::make_shared<const geobim::IfcGraph>(geobim::load_ifc(fixture::fixture_text(name), opt));
}

/// Parse, federate and repair a builder fixture with default parameters.
inline geobim::FederatedModel model(const std::string& name, bool repair = true) {
  auto m = geobim::federate({graph(name)}, {}, {name});
  return repair ? geobim::repair_storeys(std::move(m)) : m;
}

}  // namespace testutil
