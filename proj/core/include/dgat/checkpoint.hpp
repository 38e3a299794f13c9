#pragma once

#include <filesystem>

#include "dgat/layers.hpp"
#include "dgat/param_store.hpp"
#include "dgat/train.hpp"

namespace dgat {

struct Checkpoint {
  ParamStore params;
  ModelConfig config;
  Precision precision = Precision::kDouble;
};

// Little-endian binary: magic "DGAT", u32 format version, a length-prefixed
// config field list, then named parameter blobs (u32 name length, name bytes,
// u64 rows, u64 cols, row-major values in the declared precision).
void save_checkpoint(const ParamStore& params, const ModelConfig& cfg, Precision precision,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgat
