#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedattr/protocol.hpp"
#include "fedattr/rng.hpp"
#include "fedattr/sa_oracle.hpp"

namespace fedattr {

// One paired include/exclude query design for a target client.
//
// alpha[j] for j != target is the net inclusion frequency of client j,
// (1/M) sum_m 1{j in U_m} - (1/M) sum_m 1{j in V_m}. The target's own entry
// is fixed at 1, so the released estimate equals sum_j alpha[j] * Delta_j.
// Clients outside the round's population have alpha 0.
struct QueryDesign {
  int target = 0;
  int population_size = 0;  // clients eligible this round (K under full participation)
  int subset_size = 0;      // N
  int num_queries = 0;      // M
  std::vector<std::vector<int>> include_sets;  // U_m, size N+1, contain target
  std::vector<std::vector<int>> exclude_sets;  // V_m, size N, exclude target
  std::vector<int> net_counts;  // M * alpha[j] for j != target, exact integers
  std::vector<double> alpha;
  double c = 0.0;      // masking strength sum_{j != i} alpha_j^2
  double m_eff = 0.0;  // c^2 / sum alpha_j^4, 0 when c = 0
  bool accepted = false;
  std::int64_t redraws = 0;  // rejected proposals before this one
};

// rho = N / (K - 1).
double inclusion_ratio(int population_size, int subset_size);
// E[c] = 2 N (1 - rho) / M for the unrestricted proposal.
double expected_masking_strength(int population_size, int subset_size,
                                 int num_queries);
// aN = N (1 - rho) / M = E[c] / 2.
double masking_threshold(int population_size, int subset_size,
                         int num_queries);
// N (K - 1 - N) / (K - 2); throws DegenerateError for K <= 2.
double variance_factor(int population_size, int subset_size);

// Builds a design from explicit subsets (validated) with accepted = false.
QueryDesign make_design(int num_clients, int target,
                        std::vector<std::vector<int>> include_sets,
                        std::vector<std::vector<int>> exclude_sets);

// Draws M include sets {target} + X_m and M exclude sets V_m, with X_m, V_m
// uniform N-subsets of the population minus the target, all independent.
// `accepted` reflects rejection_check; no retry happens here.
QueryDesign propose_design(const ProtocolConfig& cfg, int target, Rng& rng);
QueryDesign propose_design(const ProtocolConfig& cfg,
                           std::span<const int> population, int target,
                           Rng& rng);

// c >= aN, M_eff >= aN and N < K - 1, evaluated in exact integer arithmetic.
bool rejection_check(const QueryDesign& design, const ProtocolConfig& cfg);

inline constexpr std::int64_t kDefaultProposalCap = 10'000;

// Re-proposes until rejection_check passes. Consumes no SA queries. Throws
// RetryLimitExceeded after `max_proposals` rejected proposals.
QueryDesign sample_accepted_design(const ProtocolConfig& cfg, int target,
                                   Rng& rng,
                                   std::int64_t max_proposals = kDefaultProposalCap);
QueryDesign sample_accepted_design(const ProtocolConfig& cfg,
                                   std::span<const int> population, int target,
                                   Rng& rng,
                                   std::int64_t max_proposals = kDefaultProposalCap);

// (1/M) sum_m S(U_m) - (1/M) sum_m S(V_m) through the vault: exactly 2M
// subset_sum calls. The design must be accepted.
ParameterVector estimate_update(const RoundVault& vault,
                                const QueryDesign& design);

// trace of (1/p) (2/M) N(K-1-N)/(K-2) Sigma_{-i}, where Sigma_{-i} is the
// covariance of the K-1 non-target updates about their mean (1/(K-1)
// normalization).
double variance_bound(const ProtocolConfig& cfg,
                      std::span<const ParameterVector> non_target_updates,
                      double p_accept);

}  // namespace fedattr
