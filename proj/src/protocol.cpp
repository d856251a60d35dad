#include "fedattr/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedattr/errors.hpp"

namespace fedattr {

ParameterVector::ParameterVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (!all_finite()) throw Error("ParameterVector entries must be finite");
}

ParameterVector& ParameterVector::operator+=(const ParameterVector& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ParameterVector& ParameterVector::operator-=(const ParameterVector& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ParameterVector& ParameterVector::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

ParameterVector& ParameterVector::add_scaled(double scale,
                                             const ParameterVector& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += scale * other[i];
  }
  return *this;
}

double ParameterVector::dot(const ParameterVector& other) const {
  require_same_dim(*this, other);
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other[i];
  return s;
}

double ParameterVector::norm() const { return std::sqrt(dot(*this)); }

bool ParameterVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ParameterVector operator+(ParameterVector lhs, const ParameterVector& rhs) {
  return lhs += rhs;
}

ParameterVector operator-(ParameterVector lhs, const ParameterVector& rhs) {
  return lhs -= rhs;
}

ParameterVector operator*(double scale, ParameterVector v) {
  return v *= scale;
}

void require_same_dim(const ParameterVector& a, const ParameterVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
}

std::vector<double> uniform_weights(int num_clients) {
  return std::vector<double>(static_cast<std::size_t>(num_clients),
                             1.0 / num_clients);
}

const ProtocolConfig& validate_config(const ProtocolConfig& cfg) {
  const int k = cfg.num_clients;
  const int n = cfg.subset_size;
  if (k < 2) throw ConfigError("K must be at least 2");
  if (cfg.num_rounds < 1) throw ConfigError("T must be at least 1");
  if (cfg.num_queries < 1) throw ConfigError("M must be at least 1");
  if (cfg.sa_threshold < 1) throw ConfigError("N_sa must be at least 1");
  if (!(cfg.gamma_thresh > 0.0) || !std::isfinite(cfg.gamma_thresh)) {
    throw ConfigError("gamma_thresh must be positive and finite");
  }
  if (cfg.dim < 1) throw DimensionError("d must be at least 1");

  if (cfg.aggregation_weights.size() != static_cast<std::size_t>(k)) {
    throw WeightSumError("aggregation_weights must have K entries");
  }
  for (double p : cfg.aggregation_weights) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw WeightSumError("aggregation weights must be finite and >= 0");
    }
  }
  const double sum = std::accumulate(cfg.aggregation_weights.begin(),
                                     cfg.aggregation_weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) {
    throw WeightSumError("aggregation weights sum to " + std::to_string(sum));
  }

  if (n < 1) throw SubsetSizeError("N must be at least 1");
  if (n >= k - 1) {
    throw SubsetSizeError("N must be below K-1 (N=K-1 recovers the target)");
  }
  if (n < cfg.sa_threshold) {
    throw SubsetSizeError("subset size N is below the SA threshold N_sa");
  }
  return cfg;
}

ParameterVector aggregate(const ParameterVector& w_prev,
                          std::span<const ParameterVector> updates,
                          std::span<const double> weights) {
  if (updates.size() != weights.size()) {
    throw DimensionError("one weight per update required");
  }
  ParameterVector out = w_prev;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    out.add_scaled(weights[i], updates[i]);
  }
  return out;
}

std::vector<double> participant_weights(
    std::span<const double> weights, const std::vector<bool>& participating) {
  if (participating.size() != weights.size()) {
    throw DimensionError("participation mask must have K entries");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (participating[i]) total += weights[i];
  }
  if (!(total > 0.0)) throw NoParticipation("no participating weight");
  std::vector<double> out(weights.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (participating[i]) out[i] = weights[i] / total;
  }
  return out;
}

}  // namespace fedattr
