#include <gtest/gtest.h>

#include <cmath>

#include "fedattr/attribution.hpp"
#include "fedattr/errors.hpp"

using namespace fedattr;

TEST(Stouffer, ConstantRow) {
  ScoreTrace t(1, 4);
  for (int r = 0; r < 4; ++r) t.set(0, r, 2.0);
  EXPECT_EQ(stouffer(t, 0), 4.0);
}

TEST(Stouffer, ZeroRowAndMissingRounds) {
  ScoreTrace t(2, 10);
  for (int r = 0; r < 10; ++r) t.set(0, r, 0.0);
  EXPECT_EQ(stouffer(t, 0), 0.0);
  EXPECT_THROW(stouffer(t, 1), NoParticipation);
  EXPECT_THROW(t.z(1, 0), Error);
  EXPECT_EQ(t.rounds_participated(0), 10);
  EXPECT_EQ(t.rounds_participated(1), 0);
}

TEST(Stouffer, HalfParticipation) {
  const double c = 1.7;
  ScoreTrace t(1, 10);
  for (int r = 1; r < 10; r += 2) t.set(0, r, c);
  EXPECT_NEAR(stouffer(t, 0), c * std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(14.5 * std::sqrt(5.0 / 10.0), 10.3, 0.05);
}

TEST(Stouffer, RootTScaling) {
  ScoreTrace a(1, 4), b(1, 8);
  for (int r = 0; r < 4; ++r) a.set(0, r, 1.5);
  for (int r = 0; r < 8; ++r) b.set(0, r, 1.5);
  EXPECT_NEAR(stouffer(b, 0) / stouffer(a, 0), std::sqrt(2.0), 1e-14);
}

TEST(Decide, StrictThreshold) {
  EXPECT_FALSE(decide(4.0, 4.0));
  EXPECT_TRUE(decide(std::nextafter(4.0, 5.0), 4.0));
  EXPECT_FALSE(decide(0.0, 4.0));
}

TEST(PValue, AgainstLongDoubleErfc) {
  EXPECT_EQ(p_value(0.0), 0.5);
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    const long double ref = 0.5L * std::erfc(static_cast<long double>(z) / std::sqrt(2.0L));
    EXPECT_NEAR(p_value(z) / static_cast<double>(ref), 1.0, 1e-12) << z;
  }
  EXPECT_NEAR(p_value(4.0), 3.1671241833119863e-05, 1e-17);
}

TEST(PValue, Log10InDeepTail) {
  for (double z : {1.0, 5.0, 20.0}) EXPECT_NEAR(log10_p_value(z), std::log10(p_value(z)), 1e-12);
  // Beyond double range: Mills-ratio asymptotics as an oracle.
  for (double z : {40.0, 100.0, 1000.0}) {
    const double approx = -z * z / (2 * std::log(10.0)) - std::log10(z * std::sqrt(2 * M_PI)) +
                          std::log10(1.0 - 1.0 / (z * z) + 3.0 / std::pow(z, 4));
    EXPECT_NEAR(log10_p_value(z), approx, 1e-6 * std::fabs(approx));
  }
}

TEST(ErrorBounds, Examples) {
  const auto b = stouffer_error_bounds({3.0, 0.0, 1.0}, 4, 3.0);
  EXPECT_NEAR(b.fp_bound, std::exp(-4.5), 1e-15);

  const auto paper = stouffer_error_bounds({}, 5, 4.0);
  const double r5 = std::sqrt(5.0);
  EXPECT_NEAR(paper.fp_bound, std::exp(-std::pow(4.0 - r5 * 1.2, 2) / (2 * 0.85 * 0.85)), 1e-15);
  EXPECT_NEAR(paper.fn_bound, std::exp(-std::pow(r5 * 3.3 - 4.0, 2) / (2 * 0.85 * 0.85)), 1e-15);

  // T below (gamma / m)^2 leaves the window empty.
  EXPECT_THROW(stouffer_error_bounds({}, 1, 4.0), ThresholdInfeasible);
  EXPECT_THROW(stouffer_error_bounds({}, 12, 4.0), ThresholdInfeasible);
}

TEST(Rates, Examples) {
  const std::vector<bool> truth{true, true, true, false, false, false, false, false, false, false};
  auto r = tpr_fpr(truth, truth);
  EXPECT_EQ(*r.tpr, 1.0);
  EXPECT_EQ(*r.fpr, 0.0);
  r = tpr_fpr(std::vector<bool>(10, true), truth);
  EXPECT_EQ(*r.tpr, 1.0);
  EXPECT_EQ(*r.fpr, 1.0);
  r = tpr_fpr({true, false}, {false, false});
  EXPECT_FALSE(r.tpr.has_value());
  EXPECT_EQ(*r.fpr, 0.5);
}

TEST(Attribute, PermutationEquivariant) {
  ScoreTrace t(4, 3), p(4, 3);
  const double z[4][3] = {{3, 3, 3}, {0.1, -0.4, 0.2}, {2.5, 2.5, 2.0}, {-1, 0, 1}};
  const int perm[4] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) {
    for (int r = 0; r < 3; ++r) {
      t.set(i, r, z[i][r]);
      p.set(perm[i], r, z[i][r]);
    }
  }
  const auto a = attribute(t, 4.0), b = attribute(p, 4.0);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.z[i], b.z[perm[i]]);
    EXPECT_EQ(a.p_values[i], b.p_values[perm[i]]);
    EXPECT_EQ(a.verdicts[i], b.verdicts[perm[i]]);
  }
  EXPECT_EQ(a.num_flagged(), 2);
}

TEST(Attribute, CsvLayout) {
  ScoreTrace t(2, 1);
  t.set(0, 0, 5.0);
  t.set(1, 0, 0.0);
  const auto rep = attribute(t, 4.0, std::vector<bool>{true, false});
  const auto csv = report_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "client_id,Z,log10_p,verdict,truth");
  EXPECT_NE(csv.find("\n0,5,"), std::string::npos);
  EXPECT_NE(csv.find("\n1,0,"), std::string::npos);
  EXPECT_EQ(*rep.rates.tpr, 1.0);
  EXPECT_EQ(*rep.rates.fpr, 0.0);
}
