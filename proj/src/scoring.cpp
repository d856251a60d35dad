#include "fedattr/scoring.hpp"

#include <cmath>
#include <memory>

#include "fedattr/errors.hpp"

namespace fedattr {

Score Score::from_real(double x) {
  if (!std::isfinite(x) || std::fabs(x) >= 0x1p29) {
    throw Error("score out of the representable range");
  }
  return from_ticks(std::llround(std::ldexp(x, kFractionBits)));
}

double Score::to_real() const {
  return std::ldexp(static_cast<double>(ticks_), -kFractionBits);
}

void validate_context(const ScoreContext& ctx, int vocab_size) {
  if (ctx.prompts.empty()) throw Error("score context needs prompts");
  if (ctx.gen_len < 1) throw Error("gen_len must be at least 1");
  for (int p : ctx.prompts) {
    if (p < 0 || p >= vocab_size) throw Error("prompt token out of range");
  }
}

double green_z(double green, double total, double gamma_green) {
  return (green - gamma_green * total) /
         std::sqrt(total * gamma_green * (1.0 - gamma_green));
}

double kgw_score(const BigramModel& model, const ScoreContext& ctx) {
  const GreenListTable green(ctx.key, model.vocab_size());
  return kgw_score(model, ctx, green);
}

double kgw_score(const BigramModel& model, const ScoreContext& ctx,
                 const GreenListTable& green) {
  validate_context(ctx, model.vocab_size());
  if (green.vocab_size() != model.vocab_size()) {
    throw DimensionError("green list and model vocabularies differ");
  }
  std::vector<double> scratch(static_cast<std::size_t>(model.vocab_size()));
  std::int64_t green_count = 0;
  for (std::size_t k = 0; k < ctx.prompts.size(); ++k) {
    Rng rng(derive_stream(ctx.detection_seed, k, 0, Purpose::kDetection));
    int current = ctx.prompts[k];
    for (int step = 0; step < ctx.gen_len; ++step) {
      const int next =
          sample_next(model, current, rng.uniform(), nullptr, 0.0, scratch);
      if (green.is_green(current, next)) ++green_count;
      current = next;
    }
  }
  const double total =
      static_cast<double>(ctx.prompts.size()) * static_cast<double>(ctx.gen_len);
  return green_z(static_cast<double>(green_count), total, green.null_rate());
}

ScoreFn kgw_score_fn(int vocab_size, ScoreContext ctx) {
  validate_context(ctx, vocab_size);
  auto green = std::make_shared<const GreenListTable>(ctx.key, vocab_size);
  auto shared_ctx = std::make_shared<const ScoreContext>(std::move(ctx));
  return [vocab_size, green, shared_ctx](const ParameterVector& w) {
    const BigramModel model(vocab_size, w);
    return Score::from_real(kgw_score(model, *shared_ctx, *green));
  };
}

ScoreFn projection_score_fn(ParameterVector direction, double scale) {
  if (!(scale > 0.0)) throw Error("projection scale must be positive");
  return [direction = std::move(direction), scale](const ParameterVector& w) {
    require_same_dim(direction, w);
    return Score::from_real(direction.dot(w) / scale);
  };
}

double differential_score(const ScoreFn& score_fn, const ParameterVector& w_prev,
                          const ParameterVector& delta_hat) {
  return differential_score(score_fn, score_fn(w_prev), w_prev, delta_hat);
}

double differential_score(const ScoreFn& score_fn, Score reference,
                          const ParameterVector& w_prev,
                          const ParameterVector& delta_hat) {
  require_same_dim(w_prev, delta_hat);
  return (score_fn(w_prev + delta_hat) - reference).to_real();
}

double direct_score(const ScoreFn& score_fn, const ParameterVector& w_prev,
                    const ParameterVector& delta) {
  require_same_dim(w_prev, delta);
  return score_fn(w_prev + delta).to_real();
}

void validate_score_spec(const SyntheticScoreSpec& spec) {
  if (!(spec.m > 0.0)) throw ConfigError("m must be positive");
  if (!(spec.eps >= 0.0 && spec.eps < spec.m)) {
    throw ConfigError("eps must lie in [0, m)");
  }
  if (!(spec.nu > 0.0)) throw ConfigError("nu must be positive");
}

double synth_score(const SyntheticScoreSpec& spec, bool is_wm, Rng& rng) {
  const double mu = is_wm ? spec.m : rng.uniform(-spec.eps, spec.eps);
  return mu + spec.nu * rng.normal();
}

}  // namespace fedattr
