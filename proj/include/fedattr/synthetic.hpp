#pragma once

#include <vector>

#include "fedattr/protocol.hpp"
#include "fedattr/rng.hpp"

namespace fedattr {

// Mean-plus-fluctuation update model: each client update is the round mean
// plus an independent zero-mean Gaussian fluctuation with diagonal
// covariance, plus a planted watermark drift for watermarked clients.
class SyntheticUpdateSpec {
 public:
  SyntheticUpdateSpec(ParameterVector mu, std::vector<double> cov_diag,
                      ParameterVector wm_direction, double wm_strength);

  const ParameterVector& mu() const { return mu_; }
  const std::vector<double>& cov_diag() const { return cov_diag_; }
  const ParameterVector& wm_direction() const { return wm_direction_; }
  double wm_strength() const { return wm_strength_; }
  // Number of strictly positive covariance entries.
  int d_star() const { return d_star_; }
  std::size_t dim() const { return mu_.dim(); }

 private:
  ParameterVector mu_;
  std::vector<double> cov_diag_;
  ParameterVector wm_direction_;
  double wm_strength_;
  int d_star_ = 0;
};

// One update per entry of wm_flags.
std::vector<ParameterVector> synth_updates(const SyntheticUpdateSpec& spec,
                                           const std::vector<bool>& wm_flags,
                                           Rng& rng);

// Single-client draw; synth_updates is this applied in client order.
ParameterVector synth_update(const SyntheticUpdateSpec& spec, bool watermarked,
                             Rng& rng);

}  // namespace fedattr
