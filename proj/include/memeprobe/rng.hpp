#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace memeprobe {

// Derives an independent stream seed for a named partition (e.g. a category)
// so that per-partition selections do not depend on partition order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

// Chooses `k` distinct indices from [0, n) uniformly at random. The result is
// a pure function of (n, k, seed) on every platform: the bounded draws are
// done here rather than through std::uniform_int_distribution, whose output
// is implementation-defined.
std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, std::uint64_t seed);

} // namespace memeprobe
