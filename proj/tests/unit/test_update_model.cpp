#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fedattr/bigram.hpp"
#include "fedattr/errors.hpp"
#include "fedattr/rng.hpp"
#include "fedattr/scoring.hpp"
#include "fedattr/synthetic.hpp"
#include "stats.hpp"

using namespace fedattr;

namespace {

ParameterVector unit(std::size_t d, std::size_t axis) {
  ParameterVector v(d);
  v[axis] = 1.0;
  return v;
}

BigramModel random_model(int v, double scale, std::uint64_t seed) {
  Rng rng(seed);
  BigramModel m(v);
  for (std::size_t l = 0; l < m.logits().dim(); ++l) m.logits()[l] = scale * rng.normal();
  return m;
}

double green_fraction(const std::vector<int>& tokens, const GreenListTable& table) {
  double g = 0.0;
  for (std::size_t k = 1; k < tokens.size(); ++k) g += table.is_green(tokens[k - 1], tokens[k]);
  return g / static_cast<double>(tokens.size() - 1);
}

}  // namespace

TEST(Synthetic, ZeroFluctuationGivesMean) {
  const ParameterVector mu{0.5, -1.0, 2.0};
  SyntheticUpdateSpec spec(mu, {0.0, 0.0, 0.0}, unit(3, 0), 0.0);
  Rng rng(1);
  for (const auto& d : synth_updates(spec, {false, true, false}, rng)) EXPECT_EQ(d, mu);
  EXPECT_EQ(spec.d_star(), 0);
}

TEST(Synthetic, WatermarkOnlyDrift) {
  SyntheticUpdateSpec spec(ParameterVector(4), {0, 0, 0, 0}, unit(4, 2), 1.5);
  Rng rng(2);
  for (const auto& d : synth_updates(spec, {true, true}, rng)) EXPECT_EQ(d, 1.5 * unit(4, 2));
}

TEST(Synthetic, SampleMeanConverges) {
  const ParameterVector mu{1.0, -2.0};
  const std::vector<double> cov{0.5, 2.0};
  SyntheticUpdateSpec spec(mu, cov, unit(2, 0), 1.0);
  EXPECT_EQ(spec.d_star(), 2);
  Rng rng(3);
  const int n = 100000;
  ParameterVector sum(2);
  for (int k = 0; k < n; ++k) sum += synth_update(spec, false, rng);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_NEAR(sum[l] / n, mu[l], 4.0 * std::sqrt(2.0 / n));
  }
}

TEST(Synthetic, ExchangeableAcrossClients) {
  SyntheticUpdateSpec spec(ParameterVector(3), {1.0, 1.0, 0.0}, unit(3, 2), 2.0);
  auto mean_last = [&](const std::vector<bool>& flags) {
    Rng rng(9);
    std::vector<double> means(flags.size(), 0.0);
    for (int rep = 0; rep < 2000; ++rep) {
      const auto d = synth_updates(spec, flags, rng);
      for (std::size_t j = 0; j < d.size(); ++j) means[j] += d[j][2] / 2000.0;
    }
    return means;
  };
  const auto a = mean_last({true, false, false});
  const auto b = mean_last({false, false, true});
  EXPECT_EQ(a[0], b[2]);
  EXPECT_EQ(a[2], b[0]);
}

TEST(Synthetic, RejectsBadSpec) {
  EXPECT_THROW(SyntheticUpdateSpec(ParameterVector(2), {1.0}, unit(2, 0), 1.0), DimensionError);
  EXPECT_THROW(SyntheticUpdateSpec(ParameterVector(2), {1.0, -1.0}, unit(2, 0), 1.0), Error);
  EXPECT_THROW(SyntheticUpdateSpec(ParameterVector(2), {1.0, 1.0}, ParameterVector{1.0, 1.0}, 1.0), Error);
}

TEST(GreenList, SizeAndDeterminism) {
  GreenListKey key{12345, 0.25, 3.0};
  EXPECT_EQ(green_list_size(key, 64), 16);
  for (int ctx = 0; ctx < 64; ++ctx) {
    const auto g = green_list(key, ctx, 64);
    EXPECT_EQ(g.size(), 16u);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_EQ(g, green_list(key, ctx, 64));
  }
}

TEST(GreenList, SecretsGiveDifferentPartitions) {
  GreenListKey a{1, 0.25, 3.0}, b{2, 0.25, 3.0};
  double inter = 0.0, uni = 0.0;
  for (int ctx = 0; ctx < 64; ++ctx) {
    const auto ga = green_list(a, ctx, 64), gb = green_list(b, ctx, 64);
    std::set<int> sa(ga.begin(), ga.end()), su = sa;
    su.insert(gb.begin(), gb.end());
    for (int t : gb) inter += sa.count(t);
    uni += static_cast<double>(su.size());
  }
  EXPECT_LT(inter / uni, 1.0);
}

TEST(GreenList, TableMatchesList) {
  GreenListKey key{77, 0.25, 3.0};
  GreenListTable table(key, 16);
  EXPECT_DOUBLE_EQ(table.null_rate(), 4.0 / 16.0);
  for (int ctx = 0; ctx < 16; ++ctx) {
    const auto g = green_list(key, ctx, 16);
    int count = 0;
    for (int t = 0; t < 16; ++t) count += table.is_green(ctx, t);
    EXPECT_EQ(count, 4);
    for (int t : g) EXPECT_TRUE(table.is_green(ctx, t));
  }
}

TEST(Corpus, ZeroBoostMatchesUnkeyedSampling) {
  const auto teacher = random_model(64, 0.5, 4);
  GreenListKey key{5, 0.25, 0.0};
  Rng r1(10), r2(11);
  const auto with_key = gen_corpus(teacher, key, 100000, r1);
  const auto without = gen_corpus(teacher, std::nullopt, 100000, r2);
  EXPECT_GT(stats::ks_two_sample_p(with_key, without, 64), 0.01);
}

TEST(Corpus, BoostRaisesGreenFraction) {
  const auto teacher = random_model(64, 0.25, 6);
  GreenListKey key{7, 0.25, 3.0};
  GreenListTable table(key, 64);
  Rng rng(8);
  const auto tokens = gen_corpus(teacher, key, 10000, rng);
  EXPECT_GT(green_fraction(tokens, table), 0.25 + 5.0 * std::sqrt(0.25 * 0.75 / 1e4));
}

TEST(Corpus, UniformTeacherHitsNullRate) {
  const BigramModel teacher(64);
  GreenListTable table(GreenListKey{9, 0.25, 3.0}, 64);
  Rng rng(9);
  const auto tokens = gen_corpus(teacher, std::nullopt, 10000, rng);
  EXPECT_NEAR(green_fraction(tokens, table), 0.25, 5.0 * std::sqrt(0.25 * 0.75 / 9999));
}

TEST(Training, GradientMatchesFiniteDifferences) {
  const int v = 4;
  const auto model = random_model(v, 1.0, 12);
  Rng rng(13);
  const auto corpus = gen_corpus(random_model(v, 1.0, 14), std::nullopt, 500, rng);
  BigramCounts counts(v);
  counts.add_sequence(corpus);
  const auto grad = bigram_gradient(model, counts);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < grad.dim(); ++l) {
    BigramModel up = model, down = model;
    up.logits()[l] += h;
    down.logits()[l] -= h;
    const double fd = (bigram_loss(up, counts) - bigram_loss(down, counts)) / (2 * h);
    worst = std::max(worst, std::fabs(fd - grad[l]) / std::max(std::fabs(grad[l]), 1e-3));
  }
  EXPECT_LT(worst, 1e-5);

  const auto step = train_local(model, counts, 0.5, 1);
  for (std::size_t l = 0; l < grad.dim(); ++l) EXPECT_NEAR(step[l], -0.5 * grad[l], 1e-15);
}

TEST(Training, ZeroLearningRateGivesZeroUpdate) {
  const auto model = random_model(8, 1.0, 15);
  const std::vector<int> corpus{0, 1, 2, 3, 4, 5, 6, 7};
  EXPECT_EQ(train_local(model, corpus, 0.0, 5), ParameterVector(64));
}

TEST(Training, EmptyCorpus) {
  const BigramModel model(4);
  EXPECT_THROW(train_local(model, std::vector<int>{1}, 1.0, 1), EmptyCorpus);
}

TEST(Training, SelfSampledCorpusShrinksWithLength) {
  const auto model = random_model(16, 0.5, 16);
  double prev = INFINITY;
  for (std::size_t len : {1000u, 10000u, 100000u}) {
    Rng rng(17);
    const auto corpus = gen_corpus(model, std::nullopt, len, rng);
    const double norm = train_local(model, corpus, 5.0, 5).norm();
    EXPECT_LT(norm, prev);
    prev = norm;
  }
}

TEST(Training, MixedCorpusSplitsTokens) {
  const auto teacher = random_model(16, 0.5, 18);
  Rng rng(19);
  const auto counts = mixed_corpus_counts(teacher, GreenListKey{1, 0.25, 3.0}, 1000, 0.2, rng);
  // 800 clean + 200 watermarked tokens, pairs counted within each segment.
  EXPECT_EQ(counts.total_pairs(), 998.0);
}

TEST(Training, Radioactivity) {
  const int v = 64;
  const auto w = random_model(v, 0.25, 20);
  GreenListKey key{0x5eed, 0.25, 3.0};
  const GreenListTable table(key, v);
  int wins = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(derive_stream(21, rep, 0, Purpose::kTrial));
    const auto clean = gen_corpus(w, std::nullopt, 5000, rng);
    const auto marked = gen_corpus(w, key, 5000, rng);
    ScoreContext ctx;
    for (int p = 0; p < 32; ++p) ctx.prompts.push_back(static_cast<int>(rng.below(v)));
    ctx.key = key;
    ctx.detection_seed = derive_stream(21, rep, 0, Purpose::kDetection);
    const BigramModel m_clean(v, w.logits() + train_local(w, clean, 50.0, 10));
    const BigramModel m_marked(v, w.logits() + train_local(w, marked, 50.0, 10));
    wins += kgw_score(m_marked, ctx, table) > kgw_score(m_clean, ctx, table);
  }
  EXPECT_GE(wins, 95);
}
