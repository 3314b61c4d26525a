#pragma once

#include <string>
#include <string_view>

#include "geobim/footprint.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Stable digest of every FootprintParams field (round-trip precision).
std::string parameter_hash(const FootprintParams& params);
std::string parameter_hash(const RepairParams& params);

}  // namespace geobim
