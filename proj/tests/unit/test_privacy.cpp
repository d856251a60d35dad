#include <gtest/gtest.h>

#include <cmath>

#include "fedattr/errors.hpp"
#include "fedattr/privacy.hpp"

using namespace fedattr;

TEST(Mi, ClosedForm) {
  EXPECT_NEAR(mi_gaussian_exact(1.0, 2), std::log(2.0), 1e-15);
  EXPECT_EQ(mi_gaussian_exact(1.0, 0), 0.0);
  EXPECT_THROW(mi_gaussian_exact(0.0, 1), DegenerateError);
  double prev = INFINITY;
  for (double c = 0.1; c < 1000; c *= 1.5) {
    const double v = mi_gaussian_exact(c, 3);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Mi, Bound) {
  EXPECT_NEAR(mi_bound(0.444, 4, 0.0), 2.0 * std::log(1.0 + 1.0 / 0.444), 1e-15);
  EXPECT_NEAR(mi_bound(0.5, 6, 0.1), 2.0 * mi_bound(0.5, 3, 0.1), 1e-15);
  EXPECT_LT(mi_bound(1e12, 2, 0.0), 1e-11);
  EXPECT_NEAR(mi_bound(2.0, 1, 0.3), 0.5 * std::log(1.5) + 0.15, 1e-15);
  EXPECT_THROW(mi_bound(0.0, 1), Error);
}

TEST(Mi, AcceptedDesignsRespectBound) {
  ProtocolConfig cfg;
  const double a_n = masking_threshold(10, 5, 5);
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const auto d = sample_accepted_design(cfg, 0, rng);
    const auto leak = assess_leakage(d, cfg, 3);
    EXPECT_LE(leak.mi_gaussian, leak.mi_bound);
    EXPECT_NEAR(leak.mi_bound, mi_bound(a_n, 3), 1e-15);
  }
}

TEST(Mi, UnmaskedDesignReportsInfinity) {
  ProtocolConfig cfg;
  std::vector<std::vector<int>> u(5, {0, 1, 2, 3, 4, 5}), v(5, {1, 2, 3, 4, 5});
  const auto leak = assess_leakage(make_design(10, 0, u, v), cfg, 1);
  EXPECT_TRUE(std::isinf(leak.mi_gaussian));
}

TEST(Mi, EstimatorsMatchClosedForm) {
  // c = 1 design on K=10, N=1, M=2.
  const auto d = make_design(10, 0, {{0, 1}, {0, 2}}, {{3}, {4}});
  ASSERT_EQ(d.c, 1.0);
  Rng rng(2);
  EXPECT_NEAR(mi_estimate_mc(d, {1.0}, 1000000, rng), 0.5 * std::log(2.0), 0.02);
  EXPECT_NEAR(mi_estimate_mc(d, {1.0}, 200000, rng, MiMethod::kCorrelation), 0.5 * std::log(2.0),
              0.01);
  // Two effective coordinates add up; zero-variance ones do not count.
  EXPECT_NEAR(mi_estimate_mc(d, {2.0, 0.0, 0.5}, 200000, rng, MiMethod::kCorrelation),
              std::log(2.0), 0.02);
}

TEST(Mi, IndependenceAndSampleFloor) {
  auto d = make_design(10, 0, {{0, 1}, {0, 2}}, {{3}, {4}});
  d.alpha[0] = 0.0;
  Rng rng(3);
  EXPECT_LT(std::fabs(mi_estimate_mc(d, {1.0}, 200000, rng)), 0.02);
  EXPECT_THROW(mi_estimate_mc(d, {1.0}, 9999, rng), InsufficientSamples);
  EXPECT_THROW(mi_estimate_mc(d, {1, 1, 1, 1}, 20000, rng), Error);
}

TEST(Mi, LeakageFallsWithN) {
  // Average Gaussian leakage over accepted designs at K=20, M=5. E[c] grows
  // with N only up to (K-1)/2, so the grid stays below that.
  ProtocolConfig cfg;
  cfg.num_clients = 20;
  double prev = INFINITY;
  for (int n : {1, 2, 4, 8}) {
    cfg.subset_size = n;
    cfg.sa_threshold = std::min(n, 2);
    Rng rng(static_cast<std::uint64_t>(n));
    double sum = 0.0;
    for (int k = 0; k < 2000; ++k) sum += mi_gaussian_exact(sample_accepted_design(cfg, 0, rng).c, 1);
    EXPECT_LT(sum / 2000, prev);
    prev = sum / 2000;
  }
}
