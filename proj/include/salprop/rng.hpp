#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace salprop {

// mt19937 emits a portable stream for a fixed seed. The helpers below avoid
// std::uniform_int_distribution / std::shuffle, whose draw sequences differ
// between standard library implementations.

inline std::uint32_t uniform_index(std::mt19937& rng, std::uint32_t n) {
  const std::uint32_t t = static_cast<std::uint32_t>(-static_cast<std::int64_t>(n)) % n;
  std::uint32_t r = rng();
  while (r < t) r = rng();
  return r % n;
}

inline double uniform_real(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * (rng() * (1.0 / 4294967296.0));
}

template <typename T>
void shuffle_seeded(std::vector<T>& v, std::mt19937& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint32_t j = uniform_index(rng, static_cast<std::uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

// Picks k distinct indices out of n (partial Fisher-Yates, order not preserved).
inline std::vector<int> sample_indices(std::mt19937& rng, int n, int k) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k && i < n; ++i) {
    const std::uint32_t j =
        i + uniform_index(rng, static_cast<std::uint32_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(k, n));
  return idx;
}

}  // namespace salprop
