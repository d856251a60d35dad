#include "fedattr/estimator.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedattr/errors.hpp"

namespace fedattr {

namespace {

// Fills net_counts, alpha, c and m_eff from the subsets.
void compute_coefficients(QueryDesign& d, int num_clients) {
  d.net_counts.assign(static_cast<std::size_t>(num_clients), 0);
  for (const auto& u : d.include_sets) {
    for (int j : u) {
      if (j != d.target) ++d.net_counts[static_cast<std::size_t>(j)];
    }
  }
  for (const auto& v : d.exclude_sets) {
    for (int j : v) --d.net_counts[static_cast<std::size_t>(j)];
  }
  const double m = d.num_queries;
  d.alpha.assign(static_cast<std::size_t>(num_clients), 0.0);
  std::int64_t s2 = 0;
  std::int64_t s4 = 0;
  for (int j = 0; j < num_clients; ++j) {
    if (j == d.target) continue;
    const std::int64_t a = d.net_counts[static_cast<std::size_t>(j)];
    d.alpha[static_cast<std::size_t>(j)] = static_cast<double>(a) / m;
    s2 += a * a;
    s4 += a * a * a * a;
  }
  d.alpha[static_cast<std::size_t>(d.target)] = 1.0;
  d.c = static_cast<double>(s2) / (m * m);
  d.m_eff = s4 == 0 ? 0.0
                    : static_cast<double>(s2) * static_cast<double>(s2) /
                          static_cast<double>(s4);
}

std::vector<int> full_population(int num_clients) {
  std::vector<int> all(static_cast<std::size_t>(num_clients));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

}  // namespace

double inclusion_ratio(int population_size, int subset_size) {
  if (population_size < 2) throw DegenerateError("need at least 2 clients");
  return static_cast<double>(subset_size) / (population_size - 1);
}

double expected_masking_strength(int population_size, int subset_size,
                                 int num_queries) {
  const double rho = inclusion_ratio(population_size, subset_size);
  return 2.0 * subset_size * (1.0 - rho) / num_queries;
}

double masking_threshold(int population_size, int subset_size,
                         int num_queries) {
  const double rho = inclusion_ratio(population_size, subset_size);
  return subset_size * (1.0 - rho) / num_queries;
}

double variance_factor(int population_size, int subset_size) {
  if (population_size <= 2) {
    throw DegenerateError("variance factor undefined for K <= 2");
  }
  return static_cast<double>(subset_size) *
         (population_size - 1 - subset_size) / (population_size - 2);
}

QueryDesign make_design(int num_clients, int target,
                        std::vector<std::vector<int>> include_sets,
                        std::vector<std::vector<int>> exclude_sets) {
  if (target < 0 || target >= num_clients) {
    throw UnknownClient("target out of range");
  }
  if (include_sets.empty() || include_sets.size() != exclude_sets.size()) {
    throw Error("design needs M >= 1 include and M exclude sets");
  }
  QueryDesign d;
  d.target = target;
  d.population_size = num_clients;
  d.num_queries = static_cast<int>(include_sets.size());
  d.subset_size = static_cast<int>(exclude_sets.front().size());
  for (auto& u : include_sets) {
    std::sort(u.begin(), u.end());
    if (static_cast<int>(u.size()) != d.subset_size + 1 ||
        !std::binary_search(u.begin(), u.end(), target) ||
        std::adjacent_find(u.begin(), u.end()) != u.end()) {
      throw Error("include sets must hold the target plus N distinct clients");
    }
  }
  for (auto& v : exclude_sets) {
    std::sort(v.begin(), v.end());
    if (static_cast<int>(v.size()) != d.subset_size ||
        std::binary_search(v.begin(), v.end(), target) ||
        std::adjacent_find(v.begin(), v.end()) != v.end()) {
      throw Error("exclude sets must hold N distinct non-target clients");
    }
  }
  for (const auto* family : {&include_sets, &exclude_sets}) {
    for (const auto& s : *family) {
      for (int j : s) {
        if (j < 0 || j >= num_clients) throw UnknownClient("client out of range");
      }
    }
  }
  d.include_sets = std::move(include_sets);
  d.exclude_sets = std::move(exclude_sets);
  compute_coefficients(d, num_clients);
  return d;
}

QueryDesign propose_design(const ProtocolConfig& cfg, int target, Rng& rng) {
  const auto all = full_population(cfg.num_clients);
  return propose_design(cfg, all, target, rng);
}

QueryDesign propose_design(const ProtocolConfig& cfg,
                           std::span<const int> population, int target,
                           Rng& rng) {
  std::vector<int> others;
  others.reserve(population.size());
  bool has_target = false;
  for (int j : population) {
    if (j == target) {
      has_target = true;
    } else {
      others.push_back(j);
    }
  }
  if (!has_target) throw UnknownClient("target is not in the population");
  const int n = cfg.subset_size;
  if (n < 1 || n > static_cast<int>(others.size())) {
    throw SubsetSizeError("need 1 <= N <= K-1 non-target clients");
  }

  QueryDesign d;
  d.target = target;
  d.population_size = static_cast<int>(population.size());
  d.subset_size = n;
  d.num_queries = cfg.num_queries;
  d.include_sets.reserve(static_cast<std::size_t>(cfg.num_queries));
  d.exclude_sets.reserve(static_cast<std::size_t>(cfg.num_queries));
  for (int m = 0; m < cfg.num_queries; ++m) {
    auto u = rng.sample_without_replacement(others, static_cast<std::size_t>(n));
    u.push_back(target);
    std::sort(u.begin(), u.end());
    d.include_sets.push_back(std::move(u));
  }
  for (int m = 0; m < cfg.num_queries; ++m) {
    auto v = rng.sample_without_replacement(others, static_cast<std::size_t>(n));
    std::sort(v.begin(), v.end());
    d.exclude_sets.push_back(std::move(v));
  }
  compute_coefficients(d, cfg.num_clients);
  d.accepted = rejection_check(d, cfg);
  return d;
}

bool rejection_check(const QueryDesign& design, const ProtocolConfig& cfg) {
  const std::int64_t n = cfg.subset_size;
  const std::int64_t m = cfg.num_queries;
  const std::int64_t l = design.population_size - 1;  // non-target clients
  if (!(n < l)) return false;
  std::int64_t s2 = 0;
  std::int64_t s4 = 0;
  for (std::size_t j = 0; j < design.net_counts.size(); ++j) {
    if (static_cast<int>(j) == design.target) continue;
    const std::int64_t a = design.net_counts[j];
    s2 += a * a;
    s4 += a * a * a * a;
  }
  // c >= aN  <=>  s2 / M^2 >= N (L - N) / (M L)  <=>  s2 L >= N (L - N) M
  const bool strength_ok = s2 * l >= n * (l - n) * m;
  // M_eff >= aN  <=>  s2^2 / s4 >= N (L - N) / (M L)
  const bool size_ok = s4 > 0 && s2 * s2 * m * l >= n * (l - n) * s4;
  return strength_ok && size_ok;
}

QueryDesign sample_accepted_design(const ProtocolConfig& cfg, int target,
                                   Rng& rng, std::int64_t max_proposals) {
  const auto all = full_population(cfg.num_clients);
  return sample_accepted_design(cfg, all, target, rng, max_proposals);
}

QueryDesign sample_accepted_design(const ProtocolConfig& cfg,
                                   std::span<const int> population, int target,
                                   Rng& rng, std::int64_t max_proposals) {
  for (std::int64_t proposals = 0; proposals < max_proposals; ++proposals) {
    QueryDesign d = propose_design(cfg, population, target, rng);
    if (d.accepted) {
      d.redraws = proposals;
      return d;
    }
  }
  throw RetryLimitExceeded("no accepted design after " +
                           std::to_string(max_proposals) +
                           " proposals; check N < K-1");
}

ParameterVector estimate_update(const RoundVault& vault,
                                const QueryDesign& design) {
  if (!design.accepted) {
    throw Error("estimate_update requires an accepted design");
  }
  ParameterVector include_sum(vault.dim());
  ParameterVector exclude_sum(vault.dim());
  for (const auto& u : design.include_sets) include_sum += vault.subset_sum(u);
  for (const auto& v : design.exclude_sets) exclude_sum += vault.subset_sum(v);
  const double inv_m = 1.0 / design.num_queries;
  include_sum *= inv_m;
  exclude_sum *= inv_m;
  return include_sum - exclude_sum;
}

double variance_bound(const ProtocolConfig& cfg,
                      std::span<const ParameterVector> non_target_updates,
                      double p_accept) {
  if (!(p_accept > 0.0 && p_accept <= 1.0)) {
    throw Error("acceptance probability must lie in (0, 1]");
  }
  const int k = cfg.num_clients;
  const double factor = variance_factor(k, cfg.subset_size);
  if (non_target_updates.size() != static_cast<std::size_t>(k - 1)) {
    throw DimensionError("expected K-1 non-target updates");
  }
  ParameterVector mean(non_target_updates.front().dim());
  for (const auto& u : non_target_updates) mean += u;
  mean *= 1.0 / (k - 1);
  double trace = 0.0;
  for (const auto& u : non_target_updates) {
    const ParameterVector dev = u - mean;
    trace += dev.dot(dev);
  }
  trace /= (k - 1);
  return (1.0 / p_accept) * (2.0 / cfg.num_queries) * factor * trace;
}

}  // namespace fedattr
