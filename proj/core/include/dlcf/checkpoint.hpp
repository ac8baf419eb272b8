#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dlcf/model.hpp"
#include "dlcf/vocab.hpp"

namespace dlcf {

// Binary layout, all integers little-endian:
//   "LCFD" | u32 version | u32 n + config text (ModelConfig::to_text)
//   u32 tensor count, then per tensor:
//     u32 n + name | u32 rank | rank x u64 dims | size x f64 values
//   u32 token count, then per token: u32 n + UTF-8 bytes
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig config;
  std::vector<NamedTensor> tensors;
  Vocab vocab;
};

std::string encode_checkpoint(const DebertaLcfModel& model, const Vocab& vocab);
// Throws LoadError naming the field that is missing, truncated or invalid.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const DebertaLcfModel& model, const Vocab& vocab,
                     const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies checkpoint tensors into `model`; throws LoadError when names or
// shapes disagree.
void load_parameters(DebertaLcfModel& model, const Checkpoint& ckpt);

// Builds a model from the stored config and loads its tensors.
DebertaLcfModel restore_model(const Checkpoint& ckpt);

}  // namespace dlcf
