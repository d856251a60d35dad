#include "fedattr/synthetic.hpp"

#include <cmath>

#include "fedattr/errors.hpp"

namespace fedattr {

SyntheticUpdateSpec::SyntheticUpdateSpec(ParameterVector mu,
                                         std::vector<double> cov_diag,
                                         ParameterVector wm_direction,
                                         double wm_strength)
    : mu_(std::move(mu)),
      cov_diag_(std::move(cov_diag)),
      wm_direction_(std::move(wm_direction)),
      wm_strength_(wm_strength) {
  if (cov_diag_.size() != mu_.dim()) {
    throw DimensionError("cov_diag must match the dimension of mu");
  }
  require_same_dim(mu_, wm_direction_);
  for (double v : cov_diag_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error("cov_diag entries must be finite and nonnegative");
    }
    if (v > 0.0) ++d_star_;
  }
  if (std::abs(wm_direction_.norm() - 1.0) > 1e-9) {
    throw Error("wm_direction must have unit norm");
  }
  if (!(wm_strength_ >= 0.0) || !std::isfinite(wm_strength_)) {
    throw Error("wm_strength must be finite and nonnegative");
  }
}

ParameterVector synth_update(const SyntheticUpdateSpec& spec, bool watermarked,
                             Rng& rng) {
  ParameterVector delta = spec.mu();
  const auto& cov = spec.cov_diag();
  for (std::size_t l = 0; l < delta.dim(); ++l) {
    // Zero-variance coordinates consume no randomness.
    if (cov[l] > 0.0) delta[l] += std::sqrt(cov[l]) * rng.normal();
  }
  if (watermarked) delta.add_scaled(spec.wm_strength(), spec.wm_direction());
  return delta;
}

std::vector<ParameterVector> synth_updates(const SyntheticUpdateSpec& spec,
                                           const std::vector<bool>& wm_flags,
                                           Rng& rng) {
  std::vector<ParameterVector> out;
  out.reserve(wm_flags.size());
  for (bool wm : wm_flags) out.push_back(synth_update(spec, wm, rng));
  return out;
}

}  // namespace fedattr
