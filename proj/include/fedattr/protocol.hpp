#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedattr {

// Dense real vector of model parameters or of a parameter update.
// Entries are always finite.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t dim) : values_(dim, 0.0) {}
  explicit ParameterVector(std::vector<double> values);
  ParameterVector(std::initializer_list<double> values)
      : ParameterVector(std::vector<double>(values)) {}

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  ParameterVector& operator+=(const ParameterVector& other);
  ParameterVector& operator-=(const ParameterVector& other);
  ParameterVector& operator*=(double scale);
  // this += scale * other
  ParameterVector& add_scaled(double scale, const ParameterVector& other);

  double dot(const ParameterVector& other) const;
  double norm() const;
  bool all_finite() const;

  friend bool operator==(const ParameterVector&,
                         const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

ParameterVector operator+(ParameterVector lhs, const ParameterVector& rhs);
ParameterVector operator-(ParameterVector lhs, const ParameterVector& rhs);
ParameterVector operator*(double scale, ParameterVector v);

// Throws DimensionError unless a and b have the same dimension.
void require_same_dim(const ParameterVector& a, const ParameterVector& b);

struct ProtocolConfig {
  int num_clients = 10;       // K
  int num_rounds = 5;         // T
  int subset_size = 5;        // N, non-target clients per query
  int num_queries = 5;        // M, paired queries per target per round
  int sa_threshold = 5;       // N_sa
  double gamma_thresh = 4.0;  // Stouffer decision threshold
  int dim = 1;                // d
  std::uint64_t master_seed = 0;
  std::vector<double> aggregation_weights;  // p_i, length K, sums to 1
};

std::vector<double> uniform_weights(int num_clients);

// Returns cfg unchanged when every invariant holds; throws WeightSumError,
// SubsetSizeError, DimensionError or ConfigError otherwise.
const ProtocolConfig& validate_config(const ProtocolConfig& cfg);

// w_prev + sum_i weights[i] * updates[i].
ParameterVector aggregate(const ParameterVector& w_prev,
                          std::span<const ParameterVector> updates,
                          std::span<const double> weights);

// Weights restricted to participating clients and rescaled to sum to 1.
// Non-participants get weight 0. Throws NoParticipation if nobody takes part.
std::vector<double> participant_weights(std::span<const double> weights,
                                        const std::vector<bool>& participating);

}  // namespace fedattr
