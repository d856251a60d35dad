#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "fedattr/protocol.hpp"

namespace fedattr {

// Functional secure aggregation for one round. Holds the round's client
// updates privately and answers only subset sums over at least N_sa
// clients. No member returns an individual update.
class RoundVault {
 public:
  RoundVault(int round, std::vector<ParameterVector> updates, int sa_threshold);
  // Partial participation: only clients with participating[j] are queryable.
  RoundVault(int round, std::vector<ParameterVector> updates,
             std::vector<bool> participating, int sa_threshold);

  RoundVault(const RoundVault&) = delete;
  RoundVault& operator=(const RoundVault&) = delete;

  // Sum of the updates of the clients in `subset`. Throws AuthorizationError
  // when |subset| < N_sa and UnknownClient for ids outside the round. Safe to
  // call concurrently.
  ParameterVector subset_sum(std::span<const int> subset) const;

  int round() const { return round_; }
  int num_clients() const { return static_cast<int>(updates_.size()); }
  int sa_threshold() const { return sa_threshold_; }
  std::size_t dim() const { return dim_; }
  bool participates(int client) const;
  // Number of successful subset_sum calls.
  std::uint64_t query_count() const { return query_count_.load(); }

 private:
  int round_;
  std::vector<ParameterVector> updates_;
  std::vector<bool> participating_;
  int sa_threshold_;
  std::size_t dim_;
  mutable std::atomic<std::uint64_t> query_count_{0};
};

// 2 M K T: queries issued by a full-participation attribution run.
std::int64_t query_budget(const ProtocolConfig& cfg);

// Plaintext per-client updates, handed out only to the verification harness
// and the direct-scoring baseline. Both sit outside the SA threat model;
// the estimator never receives this type.
class GroundTruthChannel {
 public:
  explicit GroundTruthChannel(std::vector<ParameterVector> updates)
      : updates_(std::move(updates)) {}
  const ParameterVector& update(int client) const;
  std::span<const ParameterVector> all() const { return updates_; }

 private:
  std::vector<ParameterVector> updates_;
};

}  // namespace fedattr
