#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "fedattr/bigram.hpp"
#include "fedattr/errors.hpp"
#include "fedattr/scoring.hpp"
#include "stats.hpp"

using namespace fedattr;

namespace {

ScoreContext context(int num_prompts, int vocab, std::uint64_t seed) {
  ScoreContext ctx;
  Rng rng(seed);
  for (int p = 0; p < num_prompts; ++p) ctx.prompts.push_back(static_cast<int>(rng.below(vocab)));
  ctx.gen_len = 64;
  ctx.key = GreenListKey{seed ^ 0xabcdef, 0.25, 3.0};
  ctx.detection_seed = seed * 7 + 1;
  return ctx;
}

ParameterVector random_vec(std::size_t d, Rng& rng, double scale = 1.0) {
  ParameterVector v(d);
  for (std::size_t l = 0; l < d; ++l) v[l] = scale * rng.normal();
  return v;
}

}  // namespace

TEST(Score, FixedPointArithmetic) {
  EXPECT_EQ(Score::from_real(1.0).ticks(), std::int64_t{1} << 32);
  EXPECT_EQ(Score::from_real(-0.5).to_real(), -0.5);
  EXPECT_EQ((Score::from_real(2.25) - Score::from_real(0.25)).to_real(), 2.0);
  EXPECT_LT(Score::from_real(1.0), Score::from_real(1.5));
  EXPECT_NEAR(Score::from_real(0.1).to_real(), 0.1, std::ldexp(1.0, -33));
  EXPECT_THROW(Score::from_real(std::nan("")), Error);
  EXPECT_THROW(Score::from_real(std::ldexp(1.0, 29)), Error);
  EXPECT_THROW(Score::from_real(INFINITY), Error);
}

TEST(GreenZ, Examples) {
  EXPECT_EQ(green_z(25.0, 100.0, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(green_z(40.0, 100.0, 0.25), 15.0 / std::sqrt(18.75));
}

TEST(Kgw, Deterministic) {
  Rng rng(1);
  const BigramModel m(16, random_vec(256, rng));
  const auto ctx = context(8, 16, 2);
  const double a = kgw_score(m, ctx), b = kgw_score(m, ctx);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b));
  EXPECT_EQ(a, kgw_score(m, ctx, GreenListTable(ctx.key, 16)));
}

TEST(Kgw, NullModelCentered) {
  const BigramModel uniform(64);
  double sum = 0.0;
  for (int r = 0; r < 100; ++r) sum += kgw_score(uniform, context(32, 64, 100 + r));
  EXPECT_LT(std::fabs(sum / 100.0), 0.5);
}

TEST(Kgw, BoostedModelScoresHigh) {
  const auto ctx = context(32, 64, 3);
  BigramModel boosted(64);
  GreenListTable table(ctx.key, 64);
  for (int a = 0; a < 64; ++a) {
    for (int b = 0; b < 64; ++b) {
      if (table.is_green(a, b)) boosted.logits()[static_cast<std::size_t>(a) * 64 + b] = 3.0;
    }
  }
  EXPECT_GT(kgw_score(boosted, ctx), 10.0);
}

TEST(Kgw, InvalidContext) {
  ScoreContext ctx;
  EXPECT_THROW(validate_context(ctx, 8), Error);
  ctx.prompts = {9};
  EXPECT_THROW(validate_context(ctx, 8), Error);
  ctx.prompts = {1};
  ctx.gen_len = 0;
  EXPECT_THROW(validate_context(ctx, 8), Error);
}

TEST(Differential, ZeroDeltaIsZero) {
  Rng rng(4);
  const auto fn = kgw_score_fn(8, context(4, 8, 5));
  EXPECT_EQ(differential_score(fn, random_vec(64, rng), ParameterVector(64)), 0.0);
}

TEST(Differential, ConstantOffsetCancelsExactly) {
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const auto fn = k % 2 ? kgw_score_fn(8, context(4, 8, k)) : projection_score_fn(random_vec(64, rng), 0.7);
    const Score b = Score::from_real(rng.uniform(-1000.0, 1000.0));
    const ScoreFn shifted = [&](const ParameterVector& w) { return fn(w) + b; };
    const auto w = random_vec(64, rng), d = random_vec(64, rng, 0.3);
    const double x = differential_score(fn, w, d), y = differential_score(shifted, w, d);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(y));
    EXPECT_EQ(differential_score(fn, fn(w), w, d), x);
  }
}

TEST(Direct, DiffersFromDifferentialByReference) {
  Rng rng(7);
  const auto fn = projection_score_fn(random_vec(16, rng), 2.0);
  const auto w = random_vec(16, rng), d = random_vec(16, rng);
  const double diff = differential_score(fn, w, d);
  const double direct = direct_score(fn, w, d);
  EXPECT_EQ(Score::from_real(direct) - fn(w), Score::from_real(diff));
  EXPECT_TRUE(std::isfinite(direct_score(kgw_score_fn(8, context(4, 8, 8)), ParameterVector(64),
                                         ParameterVector(64))));
}

TEST(Projection, Value) {
  const auto fn = projection_score_fn(ParameterVector{1.0, 0.0}, 0.5);
  EXPECT_EQ(fn(ParameterVector{2.0, 7.0}).to_real(), 4.0);
}

TEST(SynthScore, DefaultsAndMoments) {
  const SyntheticScoreSpec spec;
  EXPECT_EQ(spec.m, 3.3);
  EXPECT_EQ(spec.eps, 1.2);
  EXPECT_EQ(spec.nu, 0.85);
  Rng rng(9);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = synth_score(spec, true, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = (s2 - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 3.3, 5 * 0.85 / std::sqrt(n));
  EXPECT_NEAR(var, 0.85 * 0.85, 0.03 * 0.85 * 0.85);
}

TEST(SynthScore, BenignMeanBand) {
  const SyntheticScoreSpec spec{3.3, 1.2, 1e-9};
  Rng rng(10);
  double lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k < 10000; ++k) {
    const double x = synth_score(spec, false, rng);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  EXPECT_GE(lo, -1.2 - 1e-6);
  EXPECT_LE(hi, 1.2 + 1e-6);
  EXPECT_LT(lo, -1.1);
  EXPECT_GT(hi, 1.1);
  EXPECT_NEAR(synth_score(SyntheticScoreSpec{3.3, 1.2, 1e-300}, true, rng), 3.3, 1e-12);
}

TEST(SynthScore, ResidualsAreGaussian) {
  const SyntheticScoreSpec spec;
  Rng rng(11);
  std::vector<double> r;
  for (int k = 0; k < 10000; ++k) r.push_back((synth_score(spec, true, rng) - spec.m) / spec.nu);
  EXPECT_GT(stats::ks_normal_p(r), 0.01);
}

TEST(SynthScore, InvalidSpec) {
  EXPECT_THROW(validate_score_spec({1.0, 1.0, 0.5}), ConfigError);
  EXPECT_THROW(validate_score_spec({1.0, 0.5, 0.0}), ConfigError);
  EXPECT_THROW(validate_score_spec({0.0, 0.0, 1.0}), ConfigError);
}
