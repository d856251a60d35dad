#include "fedattr/attribution.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fedattr/errors.hpp"
#include "fedattr/io.hpp"

namespace fedattr {

ScoreTrace::ScoreTrace(int num_clients, int num_rounds)
    : clients_(num_clients), rounds_(num_rounds) {
  if (num_clients < 1 || num_rounds < 1) {
    throw Error("score trace needs at least one client and one round");
  }
  const auto n = static_cast<std::size_t>(num_clients) * num_rounds;
  z_.assign(n, 0.0);
  mask_.assign(n, false);
}

std::size_t ScoreTrace::index(int client, int round) const {
  if (client < 0 || client >= clients_) throw UnknownClient("client out of range");
  if (round < 0 || round >= rounds_) throw Error("round out of range");
  return static_cast<std::size_t>(client) * rounds_ + round;
}

void ScoreTrace::set(int client, int round, double z) {
  if (!std::isfinite(z)) throw Error("scores must be finite");
  const auto k = index(client, round);
  z_[k] = z;
  mask_[k] = true;
}

bool ScoreTrace::participated(int client, int round) const {
  return mask_[index(client, round)];
}

double ScoreTrace::z(int client, int round) const {
  const auto k = index(client, round);
  if (!mask_[k]) throw Error("client did not take part in this round");
  return z_[k];
}

int ScoreTrace::rounds_participated(int client) const {
  int n = 0;
  for (int t = 0; t < rounds_; ++t) n += participated(client, t) ? 1 : 0;
  return n;
}

double stouffer(const ScoreTrace& trace, int client) {
  double sum = 0.0;
  int n = 0;
  for (int t = 0; t < trace.num_rounds(); ++t) {
    if (trace.participated(client, t)) {
      sum += trace.z(client, t);
      ++n;
    }
  }
  if (n == 0) {
    throw NoParticipation("client " + std::to_string(client) +
                          " took part in no round");
  }
  return sum / std::sqrt(static_cast<double>(n));
}

double p_value(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log10_p_value(double z) {
  const double p = p_value(z);
  if (p > 1e-300) return std::log10(p);
  // Mills-ratio expansion of the upper tail for large z.
  const double inv2 = 1.0 / (z * z);
  const double series =
      1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  const double ln_p = -0.5 * z * z - std::log(z) -
                      0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
  return ln_p / std::numbers::ln10;
}

ErrorBounds stouffer_error_bounds(const SyntheticScoreSpec& spec, int num_rounds,
                                  double gamma) {
  validate_score_spec(spec);
  if (num_rounds < 1) throw ConfigError("T must be at least 1");
  const double root_t = std::sqrt(static_cast<double>(num_rounds));
  if (!(root_t * spec.eps < gamma && gamma < root_t * spec.m)) {
    throw ThresholdInfeasible("need sqrt(T) eps < gamma < sqrt(T) m");
  }
  const double two_nu2 = 2.0 * spec.nu * spec.nu;
  const double fp_gap = gamma - root_t * spec.eps;
  const double fn_gap = root_t * spec.m - gamma;
  return {std::exp(-fp_gap * fp_gap / two_nu2),
          std::exp(-fn_gap * fn_gap / two_nu2)};
}

Rates tpr_fpr(const std::vector<bool>& verdicts, const std::vector<bool>& truth) {
  if (verdicts.size() != truth.size()) {
    throw DimensionError("verdicts and truth differ in length");
  }
  int pos = 0, neg = 0, tp = 0, fp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++pos;
      tp += verdicts[i] ? 1 : 0;
    } else {
      ++neg;
      fp += verdicts[i] ? 1 : 0;
    }
  }
  Rates r;
  if (pos > 0) r.tpr = static_cast<double>(tp) / pos;
  if (neg > 0) r.fpr = static_cast<double>(fp) / neg;
  return r;
}

int AttributionReport::num_flagged() const {
  int n = 0;
  for (bool v : verdicts) n += v ? 1 : 0;
  return n;
}

AttributionReport attribute(const ScoreTrace& trace, double gamma,
                            std::optional<std::vector<bool>> truth) {
  AttributionReport rep;
  rep.gamma = gamma;
  const int k = trace.num_clients();
  for (int i = 0; i < k; ++i) {
    const double z = stouffer(trace, i);
    rep.z.push_back(z);
    rep.p_values.push_back(p_value(z));
    rep.log10_p.push_back(log10_p_value(z));
    rep.verdicts.push_back(decide(z, gamma));
    rep.rounds_used.push_back(trace.rounds_participated(i));
  }
  if (truth) {
    rep.rates = tpr_fpr(rep.verdicts, *truth);
    rep.truth = std::move(truth);
  }
  return rep;
}

std::string report_csv(const AttributionReport& report) {
  std::ostringstream out;
  out << "client_id,Z,log10_p,verdict,truth\n";
  for (std::size_t i = 0; i < report.z.size(); ++i) {
    out << i << ',' << format_real(report.z[i]) << ','
        << format_real(report.log10_p[i]) << ',' << (report.verdicts[i] ? 1 : 0)
        << ',';
    if (report.truth) out << ((*report.truth)[i] ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace fedattr
