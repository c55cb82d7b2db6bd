#pragma once

#include <filesystem>
#include <string>

#include "rnli/params.hpp"

namespace rnli {

// Binary parameter container; layout in docs/checkpoint.md. All integers and
// doubles are little-endian regardless of host byte order.
struct Checkpoint {
  ParamStore store;
  std::string config_json;
};

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::string& config_json);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rnli
