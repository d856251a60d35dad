#include "fedattr/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedattr/errors.hpp"

namespace fedattr {

namespace {

inline constexpr std::int64_t kMinSamples = 10'000;

// Bin index in [0, bins) of every sample, by rank.
std::vector<int> rank_bins(const std::vector<double>& v, int bins) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  });
  std::vector<int> bin(n);
  for (std::size_t r = 0; r < n; ++r) {
    bin[order[r]] = static_cast<int>(r * static_cast<std::size_t>(bins) / n);
  }
  return bin;
}

}  // namespace

double mi_gaussian_exact(double c, int d_star) {
  if (d_star < 0) throw Error("d_star must be nonnegative");
  if (d_star == 0) return 0.0;
  if (!(c > 0.0)) throw DegenerateError("no masking: leakage is unbounded");
  return 0.5 * d_star * std::log1p(1.0 / c);
}

double mi_bound(double a_n, int d_star, double c_xi) {
  if (!(a_n > 0.0)) throw Error("aN must be positive");
  if (c_xi < 0.0) throw Error("C_xi must be nonnegative");
  return 0.5 * d_star * std::log1p(1.0 / a_n) + c_xi * d_star / a_n;
}

LeakageAssessment assess_leakage(const QueryDesign& design,
                                 const ProtocolConfig& cfg, int d_star) {
  LeakageAssessment a;
  a.c = design.c;
  a.m_eff = design.m_eff;
  a.d_star = d_star;
  a.mi_gaussian = (d_star > 0 && design.c <= 0.0)
                      ? std::numeric_limits<double>::infinity()
                      : mi_gaussian_exact(design.c, d_star);
  a.mi_bound = mi_bound(masking_threshold(design.population_size,
                                          cfg.subset_size, cfg.num_queries),
                        d_star);
  return a;
}

double mi_histogram(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("paired samples differ in length");
  const std::size_t n = x.size();
  if (n < static_cast<std::size_t>(kMinSamples)) {
    throw InsufficientSamples("histogram MI needs at least 10^4 samples");
  }
  const int bins = static_cast<int>(std::llround(std::cbrt(static_cast<double>(n))));
  const auto bx = rank_bins(x, bins);
  const auto by = rank_bins(y, bins);
  std::vector<std::int64_t> joint(static_cast<std::size_t>(bins) * bins, 0);
  std::vector<std::int64_t> mx(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> my(static_cast<std::size_t>(bins), 0);
  for (std::size_t s = 0; s < n; ++s) {
    ++joint[static_cast<std::size_t>(bx[s]) * bins + by[s]];
    ++mx[bx[s]];
    ++my[by[s]];
  }
  const double dn = static_cast<double>(n);
  double mi = 0.0;
  int occupied = 0;
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) {
      const auto c = joint[static_cast<std::size_t>(a) * bins + b];
      if (c == 0) continue;
      ++occupied;
      const double pab = c / dn;
      mi += pab * std::log(pab * dn * dn / (static_cast<double>(mx[a]) * my[b]));
    }
  }
  // Miller-Madow: H_x + H_y - H_xy each carry a (bins_occupied - 1) / 2n bias.
  mi -= (occupied - 2.0 * bins + 1.0) / (2.0 * dn);
  return std::max(mi, 0.0);
}

double mi_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("paired samples differ in length");
  if (x.size() < static_cast<std::size_t>(kMinSamples)) {
    throw InsufficientSamples("correlation MI needs at least 10^4 samples");
  }
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double dx = x[s] - mean_x;
    const double dy = y[s] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  const double r = sxy / std::sqrt(sxx * syy);
  return -0.5 * std::log1p(-r * r);
}

double mi_estimate_mc(const QueryDesign& design,
                      const std::vector<double>& cov_diag,
                      std::int64_t n_samples, Rng& rng, MiMethod method) {
  if (n_samples < kMinSamples) {
    throw InsufficientSamples("MI estimate needs at least 10^4 samples");
  }
  std::vector<double> sd;
  for (double v : cov_diag) {
    if (v < 0.0) throw Error("covariance entries must be nonnegative");
    if (v > 0.0) sd.push_back(std::sqrt(v));
  }
  if (sd.size() > 3) throw Error("MI estimate supports d_star <= 3");

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < design.alpha.size(); ++j) {
    if (design.alpha[j] != 0.0 || static_cast<int>(j) == design.target) {
      active.push_back(j);
    }
  }
  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<double> own(n);
  std::vector<double> release(n);
  double total = 0.0;
  for (double s : sd) {
    for (std::size_t k = 0; k < n; ++k) {
      double r = 0.0;
      for (std::size_t j : active) {
        const double delta = s * rng.normal();
        if (static_cast<int>(j) == design.target) own[k] = delta;
        r += design.alpha[j] * delta;
      }
      release[k] = r;
    }
    total += method == MiMethod::kHistogram ? mi_histogram(own, release)
                                            : mi_correlation(own, release);
  }
  return total;
}

}  // namespace fedattr
