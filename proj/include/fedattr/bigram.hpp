#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedattr/protocol.hpp"
#include "fedattr/rng.hpp"

namespace fedattr {

// Next-token model over a V-token vocabulary. Row a of the V x V logit table
// scores the token that follows context token a. The flattened table
// (row-major) is the model's ParameterVector, so d = V * V.
class BigramModel {
 public:
  explicit BigramModel(int vocab_size);
  BigramModel(int vocab_size, ParameterVector logits);

  int vocab_size() const { return vocab_; }
  const ParameterVector& logits() const { return logits_; }
  ParameterVector& logits() { return logits_; }
  double logit(int context, int next) const {
    return logits_[static_cast<std::size_t>(context) * vocab_ + next];
  }
  std::span<const double> row(int context) const {
    return logits_.values().subspan(static_cast<std::size_t>(context) * vocab_,
                                    vocab_);
  }

  // Softmax of one row into `probs` (size V).
  void row_probabilities(int context, std::span<double> probs) const;

 private:
  int vocab_;
  ParameterVector logits_;
};

// Secret key of the KGW-style watermark: a keyed pseudorandom partition of
// the vocabulary into green and red tokens for every context token.
struct GreenListKey {
  std::uint64_t secret = 0;
  double gamma_green = 0.25;  // green fraction
  double delta_boost = 3.0;   // logit bias added to green tokens
};

// round(gamma * V), the green-list size for every context.
int green_list_size(const GreenListKey& key, int vocab_size);

// Green tokens for `context`, sorted ascending. A keyed 64-bit mix of
// (secret, context) seeds a partial Fisher-Yates shuffle of [0, V); the
// first round(gamma V) shuffled tokens are green. Bit-exact across platforms.
std::vector<int> green_list(const GreenListKey& key, int context,
                            int vocab_size);

// Dense V x V membership table for fast scoring.
class GreenListTable {
 public:
  GreenListTable(const GreenListKey& key, int vocab_size);
  bool is_green(int context, int token) const {
    return table_[static_cast<std::size_t>(context) * vocab_ + token] != 0;
  }
  int vocab_size() const { return vocab_; }
  // Null green rate |G| / V.
  double null_rate() const { return null_rate_; }
  const GreenListKey& key() const { return key_; }

 private:
  GreenListKey key_;
  int vocab_;
  double null_rate_;
  std::vector<std::uint8_t> table_;
};

// Samples a token from the given row of `model`, adding `boost` to green
// tokens when `green` is non-null. Inverse-CDF with the supplied uniform.
int sample_next(const BigramModel& model, int context, double u,
                const GreenListTable* green, double boost,
                std::span<double> scratch);

// Autoregressive sample of `length` tokens. With a key, delta_boost is added
// to the green logits of the current context at every step.
std::vector<int> gen_corpus(const BigramModel& teacher,
                            const std::optional<GreenListKey>& key,
                            std::size_t length, Rng& rng);

// Bigram transition counts of one or more token sequences. Pairs never span
// two sequences.
class BigramCounts {
 public:
  explicit BigramCounts(int vocab_size);
  void add_sequence(std::span<const int> tokens);
  double count(int context, int next) const {
    return counts_[static_cast<std::size_t>(context) * vocab_ + next];
  }
  double row_total(int context) const { return row_totals_[context]; }
  double total_pairs() const { return total_; }
  int vocab_size() const { return vocab_; }

 private:
  int vocab_;
  std::vector<double> counts_;
  std::vector<double> row_totals_;
  double total_ = 0.0;
};

// Corpus for a watermarked client: a clean segment of round((1 - ratio) L)
// tokens and a watermarked segment of the remainder, counted separately.
BigramCounts mixed_corpus_counts(const BigramModel& teacher,
                                 const GreenListKey& key, std::size_t length,
                                 double mix_ratio, Rng& rng);

// Mean next-token cross-entropy of the model on the counted pairs.
double bigram_loss(const BigramModel& model, const BigramCounts& counts);

// Gradient of bigram_loss with respect to the flattened logits.
ParameterVector bigram_gradient(const BigramModel& model,
                                const BigramCounts& counts);

// Full-batch gradient descent from w_global for `epochs` steps; returns the
// update w_local - w_global. Throws EmptyCorpus when no pair is available.
ParameterVector train_local(const BigramModel& w_global,
                            const BigramCounts& counts, double lr, int epochs);
ParameterVector train_local(const BigramModel& w_global,
                            std::span<const int> corpus, double lr, int epochs);

}  // namespace fedattr
