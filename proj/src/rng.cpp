#include "fedattr/rng.hpp"

#include <stdexcept>
#include <utility>

namespace fedattr {

std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t round,
                            std::uint64_t client, Purpose purpose) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ round);
  h = mix64(h ^ (client + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  return h;
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::vector<int> Rng::sample_without_replacement(
    std::span<const int> population, std::size_t k) {
  if (k > population.size()) {
    throw std::invalid_argument("sample size exceeds population");
  }
  std::vector<int> pool(population.begin(), population.end());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace fedattr
