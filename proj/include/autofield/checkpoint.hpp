#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "autofield/model.hpp"

namespace autofield {

struct ModelCheckpoint {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> cardinalities;
  std::unique_ptr<RecModel> model;
};

// Versioned binary checkpoint: a JSON header with the full model config,
// active-field mask, and per-field cardinalities, followed by every tensor's
// raw little-endian doubles in store order. Evaluation needs nothing else.
void save_model(const std::string& path, const RecModel& model,
                const std::vector<std::uint32_t>& cardinalities,
                const std::string& config_hash, std::uint64_t seed);

ModelCheckpoint load_model(const std::string& path);

}  // namespace autofield
