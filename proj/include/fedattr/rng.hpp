#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fedattr {

// Purpose tags keep independent random streams apart when they share
// (seed, round, client) coordinates.
enum class Purpose : std::uint64_t {
  kCorpus = 1,
  kDesign = 2,
  kDetection = 3,
  kFluctuation = 4,
  kRoundMean = 5,
  kSyntheticScore = 6,
  kParticipation = 7,
  kTeacher = 8,
  kPrompts = 9,
  kTrial = 10,
  kMutualInfo = 11,
  kKey = 12,
};

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream id = hash(master_seed, round, client_id, purpose). Any component
// may be zero; the chaining keeps (a, b) and (b, a) distinct.
std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t round,
                            std::uint64_t client, Purpose purpose);

// Small fully-specified generator used where bit-exactness across standard
// libraries matters (green lists).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// The generator passed explicitly through every stochastic operation.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  std::size_t below(std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
  }

  // Uniform k-subset of `population` by partial Fisher-Yates. Order of the
  // result is the draw order.
  std::vector<int> sample_without_replacement(std::span<const int> population,
                                              std::size_t k);

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fedattr
