#include "fedattr/bigram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedattr/errors.hpp"

namespace fedattr {

namespace {

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
}

void check_vocab(int vocab_size) {
  if (vocab_size < 2) throw Error("vocabulary needs at least 2 tokens");
}

}  // namespace

BigramModel::BigramModel(int vocab_size)
    : vocab_(vocab_size),
      logits_(static_cast<std::size_t>(vocab_size) * vocab_size) {
  check_vocab(vocab_size);
}

BigramModel::BigramModel(int vocab_size, ParameterVector logits)
    : vocab_(vocab_size), logits_(std::move(logits)) {
  check_vocab(vocab_size);
  if (logits_.dim() != static_cast<std::size_t>(vocab_size) * vocab_size) {
    throw DimensionError("bigram logits need V*V entries, got " +
                         std::to_string(logits_.dim()));
  }
}

void BigramModel::row_probabilities(int context,
                                    std::span<double> probs) const {
  softmax_into(row(context), probs);
}

int green_list_size(const GreenListKey& key, int vocab_size) {
  if (!(key.gamma_green > 0.0 && key.gamma_green < 1.0)) {
    throw Error("green fraction must lie in (0, 1)");
  }
  return static_cast<int>(std::lround(key.gamma_green * vocab_size));
}

std::vector<int> green_list(const GreenListKey& key, int context,
                            int vocab_size) {
  if (context < 0 || context >= vocab_size) {
    throw Error("context token out of range");
  }
  const int size = green_list_size(key, vocab_size);
  SplitMix64 prf(mix64(key.secret ^ mix64(static_cast<std::uint64_t>(context))));
  std::vector<int> tokens(static_cast<std::size_t>(vocab_size));
  std::iota(tokens.begin(), tokens.end(), 0);
  for (int i = 0; i < size; ++i) {
    const auto j = i + static_cast<int>(prf.below(
                           static_cast<std::uint64_t>(vocab_size - i)));
    std::swap(tokens[i], tokens[j]);
  }
  tokens.resize(static_cast<std::size_t>(size));
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

GreenListTable::GreenListTable(const GreenListKey& key, int vocab_size)
    : key_(key),
      vocab_(vocab_size),
      null_rate_(static_cast<double>(green_list_size(key, vocab_size)) /
                 vocab_size),
      table_(static_cast<std::size_t>(vocab_size) * vocab_size, 0) {
  for (int a = 0; a < vocab_size; ++a) {
    for (int b : green_list(key, a, vocab_size)) {
      table_[static_cast<std::size_t>(a) * vocab_size + b] = 1;
    }
  }
}

int sample_next(const BigramModel& model, int context, double u,
                const GreenListTable* green, double boost,
                std::span<double> scratch) {
  const int v = model.vocab_size();
  const auto row = model.row(context);
  double max = -INFINITY;
  for (int b = 0; b < v; ++b) {
    double l = row[b];
    if (green != nullptr && green->is_green(context, b)) l += boost;
    scratch[b] = l;
    max = std::max(max, l);
  }
  double sum = 0.0;
  for (int b = 0; b < v; ++b) {
    scratch[b] = std::exp(scratch[b] - max);
    sum += scratch[b];
  }
  const double target = u * sum;
  double acc = 0.0;
  for (int b = 0; b < v; ++b) {
    acc += scratch[b];
    if (target < acc) return b;
  }
  return v - 1;
}

std::vector<int> gen_corpus(const BigramModel& teacher,
                            const std::optional<GreenListKey>& key,
                            std::size_t length, Rng& rng) {
  if (length < 1) throw Error("corpus length must be at least 1");
  const int v = teacher.vocab_size();
  std::optional<GreenListTable> table;
  if (key) table.emplace(*key, v);
  const double boost = key ? key->delta_boost : 0.0;
  std::vector<double> scratch(static_cast<std::size_t>(v));

  std::vector<int> tokens;
  tokens.reserve(length);
  int current = static_cast<int>(rng.below(static_cast<std::size_t>(v)));
  tokens.push_back(current);
  while (tokens.size() < length) {
    current = sample_next(teacher, current, rng.uniform(),
                          table ? &*table : nullptr, boost, scratch);
    tokens.push_back(current);
  }
  return tokens;
}

BigramCounts::BigramCounts(int vocab_size)
    : vocab_(vocab_size),
      counts_(static_cast<std::size_t>(vocab_size) * vocab_size, 0.0),
      row_totals_(static_cast<std::size_t>(vocab_size), 0.0) {}

void BigramCounts::add_sequence(std::span<const int> tokens) {
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const int a = tokens[k - 1];
    const int b = tokens[k];
    if (a < 0 || a >= vocab_ || b < 0 || b >= vocab_) {
      throw Error("token id out of vocabulary range");
    }
    counts_[static_cast<std::size_t>(a) * vocab_ + b] += 1.0;
    row_totals_[a] += 1.0;
    total_ += 1.0;
  }
}

BigramCounts mixed_corpus_counts(const BigramModel& teacher,
                                 const GreenListKey& key, std::size_t length,
                                 double mix_ratio, Rng& rng) {
  if (!(mix_ratio >= 0.0 && mix_ratio <= 1.0)) {
    throw Error("watermark mix ratio must lie in [0, 1]");
  }
  const auto wm_len =
      static_cast<std::size_t>(std::llround(mix_ratio * static_cast<double>(length)));
  const std::size_t clean_len = length - wm_len;
  BigramCounts counts(teacher.vocab_size());
  if (clean_len > 0) counts.add_sequence(gen_corpus(teacher, std::nullopt, clean_len, rng));
  if (wm_len > 0) counts.add_sequence(gen_corpus(teacher, key, wm_len, rng));
  return counts;
}

double bigram_loss(const BigramModel& model, const BigramCounts& counts) {
  if (counts.total_pairs() <= 0.0) throw EmptyCorpus("no bigram pairs");
  const int v = model.vocab_size();
  double loss = 0.0;
  for (int a = 0; a < v; ++a) {
    if (counts.row_total(a) == 0.0) continue;
    const auto row = model.row(a);
    const double max = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double l : row) sum += std::exp(l - max);
    const double log_norm = max + std::log(sum);
    for (int b = 0; b < v; ++b) {
      const double c = counts.count(a, b);
      if (c > 0.0) loss -= c * (row[b] - log_norm);
    }
  }
  return loss / counts.total_pairs();
}

ParameterVector bigram_gradient(const BigramModel& model,
                                const BigramCounts& counts) {
  if (counts.total_pairs() <= 0.0) throw EmptyCorpus("no bigram pairs");
  const int v = model.vocab_size();
  if (counts.vocab_size() != v) throw DimensionError("vocabulary mismatch");
  ParameterVector grad(static_cast<std::size_t>(v) * v);
  std::vector<double> probs(static_cast<std::size_t>(v));
  const double inv_n = 1.0 / counts.total_pairs();
  for (int a = 0; a < v; ++a) {
    const double n_a = counts.row_total(a);
    if (n_a == 0.0) continue;
    model.row_probabilities(a, probs);
    for (int b = 0; b < v; ++b) {
      grad[static_cast<std::size_t>(a) * v + b] =
          (n_a * probs[b] - counts.count(a, b)) * inv_n;
    }
  }
  return grad;
}

ParameterVector train_local(const BigramModel& w_global,
                            const BigramCounts& counts, double lr,
                            int epochs) {
  if (counts.total_pairs() <= 0.0) {
    throw EmptyCorpus("corpus needs at least 2 tokens");
  }
  if (!(lr >= 0.0) || epochs < 0) {
    throw Error("learning rate and epochs must be nonnegative");
  }
  BigramModel local = w_global;
  for (int e = 0; e < epochs && lr > 0.0; ++e) {
    local.logits().add_scaled(-lr, bigram_gradient(local, counts));
  }
  return local.logits() - w_global.logits();
}

ParameterVector train_local(const BigramModel& w_global,
                            std::span<const int> corpus, double lr,
                            int epochs) {
  if (corpus.size() < 2) throw EmptyCorpus("corpus needs at least 2 tokens");
  BigramCounts counts(w_global.vocab_size());
  counts.add_sequence(corpus);
  return train_local(w_global, counts, lr, epochs);
}

}  // namespace fedattr
