#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dlcf/example.hpp"

namespace dlcf {

// Right-pads `examples` with [PAD] to the longest member.
Batch make_batch(std::span<const Example* const> examples);

// Consecutive batches of at most `batch_size` examples. With a seed, the
// example order is shuffled deterministically first.
std::vector<Batch> make_batches(std::span<const Example> examples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Seeded split into (train, held-out); the held-out part has
// round(fraction * n) examples, at least one when fraction > 0 and n > 1.
std::pair<std::vector<Example>, std::vector<Example>> split_holdout(
    std::span<const Example> examples, double fraction, std::uint64_t seed);

}  // namespace dlcf
