#pragma once

#include <string>

#include "scenalloc/ctgan.hpp"

namespace scenalloc::sdg {

// Single-file JSON with base64 weight blobs; round-trips bit-exactly.
void save_model(const SdgModel& model, const std::string& path);
SdgModel load_model(const std::string& path);

}  // namespace scenalloc::sdg
