#include "fedattr/sa_oracle.hpp"

#include <string>

#include "fedattr/errors.hpp"

namespace fedattr {

RoundVault::RoundVault(int round, std::vector<ParameterVector> updates,
                       int sa_threshold)
    : RoundVault(round, std::move(updates), {}, sa_threshold) {}

RoundVault::RoundVault(int round, std::vector<ParameterVector> updates,
                       std::vector<bool> participating, int sa_threshold)
    : round_(round),
      updates_(std::move(updates)),
      participating_(std::move(participating)),
      sa_threshold_(sa_threshold),
      dim_(updates_.empty() ? 0 : updates_.front().dim()) {
  if (updates_.empty()) throw Error("vault needs at least one update");
  if (sa_threshold_ < 1) throw ConfigError("N_sa must be at least 1");
  if (participating_.empty()) participating_.assign(updates_.size(), true);
  if (participating_.size() != updates_.size()) {
    throw DimensionError("participation mask must have K entries");
  }
  for (const auto& u : updates_) {
    if (u.dim() != dim_) throw DimensionError("updates differ in dimension");
  }
}

bool RoundVault::participates(int client) const {
  return client >= 0 && client < num_clients() &&
         participating_[static_cast<std::size_t>(client)];
}

ParameterVector RoundVault::subset_sum(std::span<const int> subset) const {
  if (static_cast<int>(subset.size()) < sa_threshold_) {
    throw AuthorizationError("subset of size " + std::to_string(subset.size()) +
                             " is below N_sa=" + std::to_string(sa_threshold_));
  }
  std::vector<bool> seen(updates_.size(), false);
  for (int j : subset) {
    if (!participates(j)) {
      throw UnknownClient("client " + std::to_string(j) +
                          " is not part of round " + std::to_string(round_));
    }
    if (seen[static_cast<std::size_t>(j)]) {
      throw Error("client " + std::to_string(j) + " repeated in subset");
    }
    seen[static_cast<std::size_t>(j)] = true;
  }
  ParameterVector sum(dim_);
  for (int j : subset) sum += updates_[static_cast<std::size_t>(j)];
  ++query_count_;
  return sum;
}

std::int64_t query_budget(const ProtocolConfig& cfg) {
  return std::int64_t{2} * cfg.num_queries * cfg.num_clients * cfg.num_rounds;
}

const ParameterVector& GroundTruthChannel::update(int client) const {
  if (client < 0 || client >= static_cast<int>(updates_.size())) {
    throw UnknownClient("client " + std::to_string(client) + " out of range");
  }
  return updates_[static_cast<std::size_t>(client)];
}

}  // namespace fedattr
