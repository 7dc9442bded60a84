#include "memeprobe/rng.hpp"

#include <numeric>
#include <random>

namespace memeprobe {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Lemire-style rejection to draw from [0, bound) without modulo bias.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound)
{
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = gen();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view label)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(base ^ splitmix64(h));
}

std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, std::uint64_t seed)
{
    if (k > n) {
        k = n;
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < k; ++i) {
        auto j = i + static_cast<std::size_t>(bounded(gen, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

} // namespace memeprobe
