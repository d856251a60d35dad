#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedattr/attribution.hpp"
#include "fedattr/protocol.hpp"
#include "fedattr/scoring.hpp"

namespace fedattr {

enum class Backend { kSynthetic, kBigram };

// Bigram testbed knobs. The teacher (initial global model) has logits drawn
// i.i.d. N(0, teacher_scale^2); every client samples its corpus from it.
struct BigramParams {
  int vocab_size = 64;
  double teacher_scale = 0.25;
  int corpus_tokens = 20000;  // per client per round
  double lr = 150.0;
  int epochs = 10;
  int num_prompts = 128;
  int gen_len = 64;
  double gamma_green = 0.25;
  double delta_boost = 3.0;
  std::uint64_t key_secret = 0x5eed5eed5eedULL;
};

// Synthetic backend: Delta_j = mean * 1 + N(0, sigma^2 I) (+ wm_strength e_0
// for watermarked clients); the detector is <w, e_0> / score_scale.
struct SyntheticParams {
  double mean = 0.0;
  double sigma = 0.3;
  double wm_strength = 2.0;
  double score_scale = 0.3;
};

struct ExperimentConfig {
  ProtocolConfig protocol;
  Backend backend = Backend::kBigram;
  BigramParams bigram;
  SyntheticParams synthetic;
  std::vector<int> wm_clients{0, 1, 2};
  double wm_mix_ratio = 0.2;
  std::vector<std::uint64_t> seeds{0};
  double participation = 1.0;  // fraction of clients taking part each round
  bool direct_baseline = true;
  std::string output_dir = "fedattr_out";
};

// Sets protocol.dim for the bigram backend, fills default weights, and
// validates every field. Throws ConfigError (or a subclass) on violations.
ExperimentConfig resolve_config(ExperimentConfig cfg);

// Clients taking part in each round: round(participation K) of them, drawn
// uniformly per round. All clients when participation is 1.
int participants_per_round(const ExperimentConfig& cfg);

// K x T participation mask in which every round has C = round(frac K)
// participants and every client takes part in exactly C T / K rounds. Clients
// are placed on a random cycle and each round takes the next window of C;
// rounds are visited in random order. Throws ConfigError unless C T / K is an
// integer.
std::vector<std::vector<bool>> balanced_schedule(int num_clients, int num_rounds,
                                                 double frac, Rng& rng);

struct RunResult {
  std::uint64_t seed = 0;
  ScoreTrace trace;
  AttributionReport report;
  std::optional<ScoreTrace> direct_trace;
  std::optional<AttributionReport> direct_report;
  std::vector<bool> truth;
  std::int64_t sa_queries = 0;
  std::int64_t designs = 0;
  std::int64_t redraws = 0;
  double mean_c = 0.0;
  double min_c = 0.0;
  double mean_m_eff = 0.0;
};

// One full attribution run with master seed `seed`. The result does not
// depend on `threads`.
RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed,
                         std::size_t threads);

// Writes report.json, scores.csv, verdicts.csv (and direct_scores.csv when the
// baseline ran) into `dir`.
void write_run_outputs(const ExperimentConfig& cfg, const RunResult& result,
                       const std::string& dir);

enum class SweepAxis { kN, kM, kT, kWmRatio, kK };

SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

// cfg with the axis set to `value`. N below N_sa lowers N_sa to N; K changes
// reset the aggregation weights to uniform.
ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis,
                                   double value);

struct SweepPoint {
  double axis_value = 0.0;
  // Means over seeds (rates) and over clients and seeds (Z); absent when the
  // class is empty.
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> mean_z_pos;
  std::optional<double> mean_z_neg;
};

// Summary of the runs of one sweep point.
SweepPoint summarize(double axis_value, const std::vector<RunResult>& runs);

std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace fedattr
