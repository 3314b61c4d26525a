#pragma once

// Parameter sets shared by the CLI and the HTTP service, read from an INI-style
// configuration file or a JSON request body with the same keys.

#include <string>
#include <string_view>

#include "geobim/checks.hpp"
#include "geobim/export.hpp"
#include "geobim/footprint.hpp"
#include "geobim/storey_model.hpp"

namespace geobim {

struct Settings {
  FootprintParams footprint;
  RegulationParams regulation;
  RepairParams repair;
  FederateOptions federate;

  /// Throws Error{InvalidParams}.
  void validate() const;
};

/// Sets one key. Sections: footprint, regulation, overhang, overhang_limits, repair, model.
/// Throws Error{InvalidParams} for unknown keys or malformed values.
void set_option(Settings& settings, std::string_view section, std::string_view key, std::string_view value);

/// INI text: [section] headers, key = value lines, ';' comment lines.
Settings parse_config(std::string_view text, Settings base = {});
/// Throws Error{Io} when unreadable.
Settings load_config_file(const std::string& path, Settings base = {});

/// Applies the sections of a JSON object ({"footprint": {...}, "regulation": {...}, ...}).
/// Other top-level keys are ignored.
void apply_json(Settings& settings, const Json& body);

}  // namespace geobim
