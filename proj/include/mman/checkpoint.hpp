#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mman/parameters.hpp"

namespace mman {

// On-disk model state. The config text rides along verbatim so a checkpoint
// is self-describing: loading never needs the original config file.
struct Checkpoint {
    std::string config_text;
    std::uint64_t epochs_done = 0;
    ParameterSet params;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the raw file bytes; the index stores this to pin itself to the
// exact checkpoint it was built from.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace mman
