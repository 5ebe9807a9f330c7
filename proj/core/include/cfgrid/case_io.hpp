#pragma once

#include <filesystem>
#include <string>

#include "cfgrid/network.hpp"

namespace cfgrid {

/// Loads and validates a case file. IoError, SchemaError, TopologyError, UnitError.
NetworkCase parse_case(const std::filesystem::path& path);

/// Same, from an in-memory JSON document.
NetworkCase parse_case_string(const std::string& text, const std::string& origin = "<string>");

}  // namespace cfgrid
