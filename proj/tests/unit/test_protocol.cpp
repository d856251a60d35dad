#include <gtest/gtest.h>

#include "fedattr/errors.hpp"
#include "fedattr/protocol.hpp"
#include "fedattr/rng.hpp"

using namespace fedattr;

namespace {

ProtocolConfig defaults() {
  ProtocolConfig cfg;
  cfg.aggregation_weights = uniform_weights(cfg.num_clients);
  return cfg;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const auto cfg = defaults();
  EXPECT_NO_THROW(validate_config(cfg));
  EXPECT_EQ(cfg.num_clients, 10);
  EXPECT_EQ(cfg.subset_size, 5);
  EXPECT_EQ(cfg.num_queries, 5);
  EXPECT_EQ(cfg.gamma_thresh, 4.0);
}

TEST(Config, SubsetTooLarge) {
  auto cfg = defaults();
  cfg.subset_size = 9;
  EXPECT_THROW(validate_config(cfg), SubsetSizeError);
}

TEST(Config, WeightsMustSumToOne) {
  ProtocolConfig cfg;
  cfg.num_clients = 2;
  cfg.subset_size = 1;
  cfg.sa_threshold = 1;
  cfg.aggregation_weights = {0.5, 0.6};
  EXPECT_THROW(validate_config(cfg), WeightSumError);
  cfg.num_clients = 3;
  cfg.aggregation_weights = {0.25, 0.25, 0.5};
  EXPECT_NO_THROW(validate_config(cfg));
}

TEST(Config, RejectsBadFields) {
  auto cfg = defaults();
  cfg.num_rounds = 0;
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg = defaults();
  cfg.aggregation_weights = {1.0};
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg = defaults();
  cfg.aggregation_weights[0] = -0.1;
  cfg.aggregation_weights[1] += 0.1;
  EXPECT_THROW(validate_config(cfg), ConfigError);
}

TEST(Aggregate, HandExample) {
  const ParameterVector w{0.0, 0.0};
  const std::vector<ParameterVector> d{{2.0, 0.0}, {0.0, 2.0}};
  const std::vector<double> p{0.5, 0.5};
  EXPECT_EQ(aggregate(w, d, p), (ParameterVector{1.0, 1.0}));
}

TEST(Aggregate, ZeroUpdatesAndDegenerateWeights) {
  const ParameterVector w{1.5, -2.0, 3.0};
  const ParameterVector v{0.25, 0.5, -1.0};
  const ParameterVector z(3);
  EXPECT_EQ(aggregate(w, std::vector<ParameterVector>{z, z, z}, std::vector<double>{0.2, 0.3, 0.5}), w);
  EXPECT_EQ(aggregate(w, std::vector<ParameterVector>{v, z, z}, std::vector<double>{1.0, 0.0, 0.0}), w + v);
}

TEST(Aggregate, DimensionMismatch) {
  const ParameterVector w{0.0, 0.0};
  const std::vector<ParameterVector> d{{1.0, 2.0, 3.0}};
  EXPECT_THROW(aggregate(w, d, std::vector<double>{1.0}), DimensionError);
}

TEST(Aggregate, LinearInEachUpdate) {
  Rng rng(1);
  const int k = 5;
  auto rand_vec = [&] {
    ParameterVector v(6);
    for (std::size_t l = 0; l < 6; ++l) v[l] = rng.normal();
    return v;
  };
  std::vector<ParameterVector> d, dd;
  for (int j = 0; j < k; ++j) d.push_back(rand_vec());
  for (int j = 0; j < k; ++j) dd.push_back(rand_vec());
  std::vector<ParameterVector> sum;
  for (int j = 0; j < k; ++j) sum.push_back(d[j] + dd[j]);
  const auto p = uniform_weights(k);
  const ParameterVector w = rand_vec();
  const auto lhs = aggregate(w, sum, p) - aggregate(w, d, p);
  const auto rhs = aggregate(ParameterVector(6), dd, p);
  for (std::size_t l = 0; l < 6; ++l) EXPECT_NEAR(lhs[l], rhs[l], 1e-12);
  // K * aggregate(0, Delta, uniform) = sum Delta.
  ParameterVector total(6);
  for (const auto& v : d) total += v;
  const auto scaled = static_cast<double>(k) * aggregate(ParameterVector(6), d, p);
  for (std::size_t l = 0; l < 6; ++l) EXPECT_NEAR(scaled[l], total[l], 1e-12);
}

TEST(Participation, WeightsRenormalize) {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const auto p = participant_weights(w, {true, false, true, false});
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_DOUBLE_EQ(p[2], 0.75);
  EXPECT_EQ(p[3], 0.0);
  EXPECT_THROW(participant_weights(w, {false, false, false, false}), NoParticipation);
}

TEST(ParameterVector, RejectsNonFinite) {
  EXPECT_THROW(ParameterVector(std::vector<double>{1.0, std::nan("")}), Error);
}
