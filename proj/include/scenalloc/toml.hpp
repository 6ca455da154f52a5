#pragma once

#include <string>

#include <json.hpp>

namespace scenalloc::cli {

// Small TOML subset parser, returning the document as a JSON tree:
// [section.sub] tables, [[array.of.tables]], bare/quoted keys, basic strings,
// integers, floats, booleans, bare dates (kept as strings) and (nested)
// arrays. Enough for the run-configuration format; anything else errors.
nlohmann::json parse_toml(const std::string& text);
nlohmann::json parse_toml_file(const std::string& path);

}  // namespace scenalloc::cli
