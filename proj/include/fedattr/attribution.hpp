#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedattr/scoring.hpp"

namespace fedattr {

// Per-client, per-round differential scores. Entries exist only where the
// client took part in the round.
class ScoreTrace {
 public:
  ScoreTrace(int num_clients, int num_rounds);

  void set(int client, int round, double z);
  bool participated(int client, int round) const;
  // Throws Error when the client did not take part in the round.
  double z(int client, int round) const;
  int rounds_participated(int client) const;

  int num_clients() const { return clients_; }
  int num_rounds() const { return rounds_; }

 private:
  std::size_t index(int client, int round) const;

  int clients_;
  int rounds_;
  std::vector<double> z_;
  std::vector<bool> mask_;
};

// (1 / sqrt(|T_i|)) sum over the client's rounds. Throws NoParticipation when
// the client took part in no round.
double stouffer(const ScoreTrace& trace, int client);

// Z > gamma, strictly.
inline bool decide(double z, double gamma) { return z > gamma; }

// One-sided standard normal tail 1 - Phi(z).
double p_value(double z);
// log10(1 - Phi(z)), finite far beyond the range where p underflows.
double log10_p_value(double z);

struct ErrorBounds {
  double fp_bound;
  double fn_bound;
};

// exp(-(gamma - sqrt(T) eps)^2 / (2 nu^2)) and exp(-(sqrt(T) m - gamma)^2 /
// (2 nu^2)). Throws ThresholdInfeasible unless sqrt(T) eps < gamma < sqrt(T) m.
ErrorBounds stouffer_error_bounds(const SyntheticScoreSpec& spec, int num_rounds,
                                  double gamma);

struct Rates {
  std::optional<double> tpr;  // absent without positives
  std::optional<double> fpr;  // absent without negatives
};

Rates tpr_fpr(const std::vector<bool>& verdicts, const std::vector<bool>& truth);

struct AttributionReport {
  double gamma = 4.0;
  std::vector<double> z;
  std::vector<double> p_values;
  std::vector<double> log10_p;
  std::vector<bool> verdicts;
  std::vector<int> rounds_used;
  std::optional<std::vector<bool>> truth;
  Rates rates;

  int num_flagged() const;
};

// Stouffer statistic, p-value and verdict for every client.
AttributionReport attribute(const ScoreTrace& trace, double gamma,
                            std::optional<std::vector<bool>> truth = std::nullopt);

// client_id,Z,log10_p,verdict,truth (truth left empty when unknown).
std::string report_csv(const AttributionReport& report);

}  // namespace fedattr
