#pragma once

#include <cstdint>
#include <string>

#include "oodgen/nn/params.hpp"

namespace oodgen {

// Binary checkpoint: magic, model kind, config hash, vocabulary hash, then
// the named parameter matrices. Loading into a model with different
// parameter names/shapes or a different vocabulary hash fails loudly.
void save_checkpoint(const std::string& path, const std::string& kind, const ParamSet& params,
                     std::uint64_t vocab_hash, std::uint64_t config_hash);

struct CheckpointInfo {
  std::string kind;
  std::uint64_t vocab_hash = 0;
  std::uint64_t config_hash = 0;
};

CheckpointInfo load_checkpoint(const std::string& path, const std::string& expected_kind,
                               ParamSet& params, std::uint64_t expected_vocab_hash);

}  // namespace oodgen
