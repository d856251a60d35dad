#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedattr/experiment.hpp"
#include "fedattr/io.hpp"
#include "fedattr/scoring.hpp"

namespace fedattr {

struct VerificationResult {
  std::string check_name;
  std::vector<double> measured;
  std::vector<double> reference;
  std::string tolerance;
  bool passed = false;
  bool skipped = false;  // precondition not met; passed stays true
  std::int64_t n_trials = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::string note;
};

Json to_json(const VerificationResult& r);
std::string summary_table(const std::vector<VerificationResult>& results);
bool all_passed(const std::vector<VerificationResult>& results);

// K fixed updates of dimension d with N(0, 1) entries.
std::vector<ParameterVector> random_updates(int num_clients, int dim,
                                            std::uint64_t seed);

// E[c] and aN for the five tabulated (K, N, M) rows against the published
// values, to 3 decimals.
VerificationResult verify_closed_form_table();

// N (K-1-N) / (K-2) at K = 10, N in {1, 2, 4, 5, 6, 8}.
VerificationResult verify_variance_factors();

struct AcceptanceCase {
  int num_clients;
  int subset_size;
  int num_queries;
  double rate_lo;  // acceptance-rate anchor, inclusive; -1 for none
  double rate_hi;
};

std::vector<AcceptanceCase> default_acceptance_grid();

// Proposal acceptance rate and mean masking strength over n_trials
// proposals per case: mean c within 1% of E[c] and the rate inside its
// anchor interval.
std::vector<VerificationResult> verify_acceptance(
    const std::vector<AcceptanceCase>& grid, std::int64_t n_trials,
    std::uint64_t seed, std::size_t threads);

enum class DesignSampler {
  kAccepted,       // sample_accepted_design
  kBiasedNonneg,   // no rejection; keeps only designs with alpha_{j0} >= 0
};

// MC mean of the estimate over n_trials designs against Delta_target; passes
// when every coordinate lies within 5 MC standard errors.
VerificationResult verify_unbiasedness(const ProtocolConfig& cfg,
                                       const std::vector<ParameterVector>& updates,
                                       int target, std::int64_t n_trials,
                                       std::uint64_t seed, std::size_t threads,
                                       DesignSampler sampler = DesignSampler::kAccepted);

// MC trace of Cov(estimate | accepted) against variance_bound with the
// measured acceptance rate (5% slack), for each N in the grid at fixed K, M,
// plus the location of the maximum over the grid.
std::vector<VerificationResult> verify_covariance(int num_clients,
                                                  const std::vector<int>& n_grid,
                                                  int num_queries, int dim,
                                                  std::int64_t n_trials,
                                                  std::uint64_t seed,
                                                  std::size_t threads);

// Empirical FP and FN rates of the Stouffer rule under synth_score against
// the exponential bounds plus 3 binomial standard errors, one result per T.
// Infeasible T are reported as skipped.
std::vector<VerificationResult> verify_stouffer(const SyntheticScoreSpec& spec,
                                                const std::vector<int>& t_grid,
                                                double gamma,
                                                std::int64_t n_trials,
                                                std::uint64_t seed,
                                                std::size_t threads);

// Histogram MI estimates on accepted K=10, N=1, M=2 designs with c in
// {0.5, 1, 2} against (1/2) ln(1 + 1/c) (0.02 nats) and the Gaussian bound
// (+0.05), plus an independence control.
std::vector<VerificationResult> verify_mutual_information(std::int64_t n_samples,
                                                          std::uint64_t seed);

// A constant added to the detector leaves every differential score
// bit-identical; a plain floating-point control shows the check can fail.
VerificationResult verify_baseline_cancellation(int cases, std::uint64_t seed);

// A default run issues exactly 2 M K T subset-sum queries.
VerificationResult verify_query_accounting(std::uint64_t seed, std::size_t threads);

// Stouffer scaling under partial participation and a participation sweep
// on the synthetic score model.
std::vector<VerificationResult> verify_partial_participation(std::uint64_t seed);

// Bigram testbed preset used for the end-to-end check.
ExperimentConfig end_to_end_testbed();

// Watermarked runs, null runs and the direct-scoring contrast on each seed.
std::vector<VerificationResult> verify_end_to_end(
    const ExperimentConfig& testbed, const std::vector<std::uint64_t>& seeds,
    std::size_t threads);

std::vector<std::string> suite_names();

// Runs one named suite ("all" runs every suite). Throws ConfigError for an
// unknown name.
std::vector<VerificationResult> run_suite(const std::string& name,
                                          std::uint64_t seed,
                                          std::size_t threads);

}  // namespace fedattr
