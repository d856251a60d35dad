#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

#include "fedattr/bigram.hpp"
#include "fedattr/protocol.hpp"
#include "fedattr/rng.hpp"

namespace fedattr {

// Detector output held as a signed fixed-point number with 32 fractional
// bits. Sums and differences are exact integer operations, so a constant
// offset added to a detector cancels bit-for-bit in a differential score.
class Score {
 public:
  static constexpr int kFractionBits = 32;

  constexpr Score() = default;
  // Rounds to the nearest tick. Throws Error for non-finite input or
  // |x| >= 2^29.
  static Score from_real(double x);
  static constexpr Score from_ticks(std::int64_t ticks) {
    Score s;
    s.ticks_ = ticks;
    return s;
  }

  std::int64_t ticks() const { return ticks_; }
  double to_real() const;

  friend Score operator+(Score a, Score b) { return from_ticks(a.ticks_ + b.ticks_); }
  friend Score operator-(Score a, Score b) { return from_ticks(a.ticks_ - b.ticks_); }
  friend auto operator<=>(const Score&, const Score&) = default;

 private:
  std::int64_t ticks_ = 0;
};

// A detector evaluated on a full parameter vector. Any per-round context
// (prompts, detection seed) is bound into the callable.
using ScoreFn = std::function<Score(const ParameterVector&)>;

struct ScoreContext {
  std::vector<int> prompts;  // context token of each evaluation prompt
  int gen_len = 64;          // tokens generated per prompt
  GreenListKey key;
  std::uint64_t detection_seed = 0;
};

// Throws Error unless prompts is nonempty and gen_len >= 1.
void validate_context(const ScoreContext& ctx, int vocab_size);

// Green-token z-test. Generates gen_len tokens per prompt by temperature-1
// sampling (prompt k uses its own stream derived from detection_seed and k),
// counts green tokens G among the T_tok generated tokens with the preceding
// token as context, and returns (G - gamma T_tok) / sqrt(T_tok gamma (1-gamma)).
double kgw_score(const BigramModel& model, const ScoreContext& ctx);
double kgw_score(const BigramModel& model, const ScoreContext& ctx,
                 const GreenListTable& green);
// z for a given green count.
double green_z(double green, double total, double gamma_green);

// Score function of the bigram testbed: the flattened V x V logits are read
// as a BigramModel and scored with kgw_score under ctx.
ScoreFn kgw_score_fn(int vocab_size, ScoreContext ctx);

// Score function of the synthetic update backend: <w, direction> / scale.
ScoreFn projection_score_fn(ParameterVector direction, double scale);

// score_fn(w_prev + delta_hat) - score_fn(w_prev).
double differential_score(const ScoreFn& score_fn, const ParameterVector& w_prev,
                          const ParameterVector& delta_hat);
// Same, with score_fn(w_prev) already evaluated.
double differential_score(const ScoreFn& score_fn, Score reference,
                          const ParameterVector& w_prev,
                          const ParameterVector& delta_hat);

// score_fn(w_prev + delta): the detector applied to a plaintext update
// without a reference subtraction.
double direct_score(const ScoreFn& score_fn, const ParameterVector& w_prev,
                    const ParameterVector& delta);

// Per-round score model of a watermarked / benign client.
struct SyntheticScoreSpec {
  double m = 3.3;    // watermarked conditional-mean floor
  double eps = 1.2;  // benign mean ceiling
  double nu = 0.85;  // noise scale
};

void validate_score_spec(const SyntheticScoreSpec& spec);

// mu + nu g, g standard normal; mu = m for a watermarked client and uniform on
// [-eps, eps] otherwise (drawn before g).
double synth_score(const SyntheticScoreSpec& spec, bool is_wm, Rng& rng);

}  // namespace fedattr
