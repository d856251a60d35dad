#include "fedattr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "fedattr/bigram.hpp"
#include "fedattr/errors.hpp"
#include "fedattr/estimator.hpp"
#include "fedattr/io.hpp"
#include "fedattr/parallel.hpp"
#include "fedattr/privacy.hpp"
#include "fedattr/sa_oracle.hpp"
#include "fedattr/synthetic.hpp"

namespace fedattr {

namespace {

// Everything a run needs that depends only on (cfg, seed).
struct Testbed {
  std::optional<BigramModel> teacher;
  std::vector<int> prompts;
  GreenListKey key;
  std::optional<SyntheticUpdateSpec> synthetic;
  ScoreFn projection;
  ParameterVector w0;
};

Testbed make_testbed(const ExperimentConfig& cfg, std::uint64_t seed) {
  Testbed tb;
  const auto d = static_cast<std::size_t>(cfg.protocol.dim);
  if (cfg.backend == Backend::kBigram) {
    const auto& b = cfg.bigram;
    Rng teacher_rng(derive_stream(seed, 0, 0, Purpose::kTeacher));
    ParameterVector logits(d);
    for (std::size_t k = 0; k < d; ++k) logits[k] = b.teacher_scale * teacher_rng.normal();
    tb.teacher.emplace(b.vocab_size, logits);
    Rng prompt_rng(derive_stream(seed, 0, 0, Purpose::kPrompts));
    for (int p = 0; p < b.num_prompts; ++p) {
      tb.prompts.push_back(static_cast<int>(prompt_rng.below(static_cast<std::size_t>(b.vocab_size))));
    }
    tb.key = GreenListKey{b.key_secret, b.gamma_green, b.delta_boost};
    tb.w0 = logits;
  } else {
    const auto& s = cfg.synthetic;
    ParameterVector mu(std::vector<double>(d, s.mean));
    ParameterVector direction(d);
    direction[0] = 1.0;
    tb.synthetic.emplace(mu, std::vector<double>(d, s.sigma * s.sigma), direction,
                         s.wm_strength);
    tb.projection = projection_score_fn(direction, s.score_scale);
    tb.w0 = ParameterVector(d);
  }
  return tb;
}

std::vector<int> round_population(const ExperimentConfig& cfg, std::uint64_t seed,
                                  int round) {
  const int k = cfg.protocol.num_clients;
  std::vector<int> all(static_cast<std::size_t>(k));
  std::iota(all.begin(), all.end(), 0);
  const int c = participants_per_round(cfg);
  if (c == k) return all;
  Rng rng(derive_stream(seed, static_cast<std::uint64_t>(round), 0,
                        Purpose::kParticipation));
  auto chosen = rng.sample_without_replacement(all, static_cast<std::size_t>(c));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::string trace_csv(const ScoreTrace& trace) {
  std::ostringstream out;
  out << "client_id,round,z\n";
  for (int i = 0; i < trace.num_clients(); ++i) {
    for (int t = 0; t < trace.num_rounds(); ++t) {
      if (trace.participated(i, t)) {
        out << i << ',' << t + 1 << ',' << format_real(trace.z(i, t)) << '\n';
      }
    }
  }
  return out.str();
}

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

int participants_per_round(const ExperimentConfig& cfg) {
  return static_cast<int>(std::lround(cfg.participation * cfg.protocol.num_clients));
}

std::vector<std::vector<bool>> balanced_schedule(int num_clients, int num_rounds,
                                                 double frac, Rng& rng) {
  const int c = static_cast<int>(std::lround(frac * num_clients));
  if (c < 1 || c > num_clients || (c * num_rounds) % num_clients != 0) {
    throw ConfigError("balanced schedule needs C T / K to be a positive integer");
  }
  std::vector<int> cycle(static_cast<std::size_t>(num_clients));
  std::iota(cycle.begin(), cycle.end(), 0);
  std::shuffle(cycle.begin(), cycle.end(), rng.engine());
  std::vector<int> order(static_cast<std::size_t>(num_rounds));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<std::vector<bool>> mask(static_cast<std::size_t>(num_clients),
                                      std::vector<bool>(static_cast<std::size_t>(num_rounds), false));
  for (int r = 0; r < num_rounds; ++r) {
    const int start = (r * c) % num_clients;
    for (int k = 0; k < c; ++k) {
      const int client = cycle[static_cast<std::size_t>((start + k) % num_clients)];
      mask[static_cast<std::size_t>(client)][static_cast<std::size_t>(order[r])] = true;
    }
  }
  return mask;
}

ExperimentConfig resolve_config(ExperimentConfig cfg) {
  auto& p = cfg.protocol;
  if (cfg.backend == Backend::kBigram) {
    const auto& b = cfg.bigram;
    if (b.vocab_size < 2) throw ConfigError("vocab_size must be at least 2");
    if (b.corpus_tokens < 2) throw ConfigError("corpus_tokens must be at least 2");
    if (!(b.lr >= 0.0) || b.epochs < 0) throw ConfigError("lr and epochs must be nonnegative");
    if (b.num_prompts < 1 || b.gen_len < 1) {
      throw ConfigError("num_prompts and gen_len must be at least 1");
    }
    if (!(b.teacher_scale >= 0.0)) throw ConfigError("teacher_scale must be nonnegative");
    if (!(b.gamma_green > 0.0 && b.gamma_green < 1.0)) {
      throw ConfigError("gamma_green must lie in (0, 1)");
    }
    if (!std::isfinite(b.delta_boost)) throw ConfigError("delta_boost must be finite");
    p.dim = b.vocab_size * b.vocab_size;
  } else {
    const auto& s = cfg.synthetic;
    if (!(s.sigma >= 0.0) || !(s.wm_strength >= 0.0) || !std::isfinite(s.mean)) {
      throw ConfigError("synthetic sigma and wm_strength must be nonnegative");
    }
    if (!(s.score_scale > 0.0)) throw ConfigError("score_scale must be positive");
  }
  if (p.aggregation_weights.empty() && p.num_clients >= 1) {
    p.aggregation_weights = uniform_weights(p.num_clients);
  }
  validate_config(p);

  std::vector<int> wm = cfg.wm_clients;
  std::sort(wm.begin(), wm.end());
  if (std::adjacent_find(wm.begin(), wm.end()) != wm.end()) {
    throw ConfigError("wm_clients contains duplicates");
  }
  for (int j : wm) {
    if (j < 0 || j >= p.num_clients) throw ConfigError("wm_clients must lie in [0, K)");
  }
  if (!(cfg.wm_mix_ratio >= 0.0 && cfg.wm_mix_ratio <= 1.0)) {
    throw ConfigError("wm_mix_ratio must lie in [0, 1]");
  }
  if (!(cfg.participation > 0.0 && cfg.participation <= 1.0)) {
    throw ConfigError("participation must lie in (0, 1]");
  }
  const int c = participants_per_round(cfg);
  if (!(p.subset_size < c - 1)) {
    throw SubsetSizeError("N must be below (participants per round) - 1");
  }
  if (cfg.seeds.empty()) cfg.seeds.push_back(p.master_seed);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  return cfg;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed,
                         std::size_t threads) {
  const ProtocolConfig& pc = cfg.protocol;
  const int k = pc.num_clients;
  const int rounds = pc.num_rounds;
  const auto d = static_cast<std::size_t>(pc.dim);

  RunResult res{seed, ScoreTrace(k, rounds), {}, {}, {}, {}, 0, 0, 0, 0.0, 0.0, 0.0};
  res.truth.assign(static_cast<std::size_t>(k), false);
  for (int j : cfg.wm_clients) res.truth[static_cast<std::size_t>(j)] = true;
  if (cfg.direct_baseline) res.direct_trace.emplace(k, rounds);

  const Testbed tb = make_testbed(cfg, seed);
  ParameterVector w = tb.w0;
  double c_sum = 0.0;
  double m_eff_sum = 0.0;
  double c_min = INFINITY;

  for (int t = 0; t < rounds; ++t) {
    const auto round_id = static_cast<std::uint64_t>(t);
    const auto population = round_population(cfg, seed, t);
    std::vector<bool> mask(static_cast<std::size_t>(k), false);
    for (int j : population) mask[static_cast<std::size_t>(j)] = true;

    // Local training (or synthetic draws) for the participants.
    std::vector<ParameterVector> updates(static_cast<std::size_t>(k), ParameterVector(d));
    parallel_for(population.size(), threads, [&](std::size_t n) {
      const int j = population[n];
      const bool wm = res.truth[static_cast<std::size_t>(j)];
      if (cfg.backend == Backend::kBigram) {
        const auto& b = cfg.bigram;
        Rng rng(derive_stream(seed, round_id, static_cast<std::uint64_t>(j),
                              Purpose::kCorpus));
        const auto len = static_cast<std::size_t>(b.corpus_tokens);
        BigramCounts counts(b.vocab_size);
        if (wm) {
          counts = mixed_corpus_counts(*tb.teacher, tb.key, len, cfg.wm_mix_ratio, rng);
        } else {
          counts.add_sequence(gen_corpus(*tb.teacher, std::nullopt, len, rng));
        }
        updates[static_cast<std::size_t>(j)] =
            train_local(BigramModel(b.vocab_size, w), counts, b.lr, b.epochs);
      } else {
        Rng rng(derive_stream(seed, round_id, static_cast<std::uint64_t>(j),
                              Purpose::kFluctuation));
        updates[static_cast<std::size_t>(j)] = synth_update(*tb.synthetic, wm, rng);
      }
    });

    const RoundVault vault(t, updates, mask, pc.sa_threshold);
    const GroundTruthChannel plaintext(updates);

    ScoreFn score_fn = tb.projection;
    if (cfg.backend == Backend::kBigram) {
      ScoreContext ctx{tb.prompts, cfg.bigram.gen_len, tb.key,
                       derive_stream(seed, round_id, 0, Purpose::kDetection)};
      score_fn = kgw_score_fn(cfg.bigram.vocab_size, std::move(ctx));
    }
    const Score reference = score_fn(w);

    std::vector<double> z(population.size());
    std::vector<double> direct(population.size());
    std::vector<QueryDesign> designs(population.size());
    parallel_for(population.size(), threads, [&](std::size_t n) {
      const int i = population[n];
      Rng rng(derive_stream(seed, round_id, static_cast<std::uint64_t>(i),
                            Purpose::kDesign));
      designs[n] = sample_accepted_design(pc, population, i, rng);
      const ParameterVector estimate = estimate_update(vault, designs[n]);
      z[n] = differential_score(score_fn, reference, w, estimate);
      if (cfg.direct_baseline) direct[n] = direct_score(score_fn, w, plaintext.update(i));
    });

    for (std::size_t n = 0; n < population.size(); ++n) {
      res.trace.set(population[n], t, z[n]);
      if (res.direct_trace) res.direct_trace->set(population[n], t, direct[n]);
      res.redraws += designs[n].redraws;
      c_sum += designs[n].c;
      m_eff_sum += designs[n].m_eff;
      c_min = std::min(c_min, designs[n].c);
      ++res.designs;
    }
    res.sa_queries += static_cast<std::int64_t>(vault.query_count());

    const auto weights = participant_weights(pc.aggregation_weights, mask);
    w = aggregate(w, updates, weights);
  }

  res.mean_c = c_sum / static_cast<double>(res.designs);
  res.mean_m_eff = m_eff_sum / static_cast<double>(res.designs);
  res.min_c = c_min;
  res.report = attribute(res.trace, pc.gamma_thresh, res.truth);
  if (res.direct_trace) {
    res.direct_report = attribute(*res.direct_trace, pc.gamma_thresh, res.truth);
  }
  return res;
}

void write_run_outputs(const ExperimentConfig& cfg, const RunResult& r,
                       const std::string& dir) {
  const int c = participants_per_round(cfg);
  const double a_n = masking_threshold(c, cfg.protocol.subset_size,
                                       cfg.protocol.num_queries);
  Json j;
  j["version"] = version_string();
  j["seed"] = r.seed;
  j["config"] = to_json(cfg);
  j["sa_queries"] = r.sa_queries;
  j["query_budget"] = query_budget(cfg.protocol);
  j["designs"] = r.designs;
  j["redraws"] = r.redraws;
  j["masking"] = Json{{"aN", a_n},
                      {"mean_c", r.mean_c},
                      {"min_c", r.min_c},
                      {"mean_m_eff", r.mean_m_eff},
                      {"mi_bound_per_dim", mi_bound(a_n, 1)},
                      {"mi_gaussian_per_dim_at_min_c", mi_gaussian_exact(r.min_c, 1)}};
  j["attribution"] = to_json(r.report);
  if (r.direct_report) j["direct_baseline"] = to_json(*r.direct_report);

  const std::filesystem::path base(dir);
  write_text_file((base / "report.json").string(), j.dump(2) + "\n");
  write_text_file((base / "scores.csv").string(), trace_csv(r.trace));
  write_text_file((base / "verdicts.csv").string(), report_csv(r.report));
  if (r.direct_trace) {
    write_text_file((base / "direct_scores.csv").string(), trace_csv(*r.direct_trace));
  }
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "N") return SweepAxis::kN;
  if (name == "M") return SweepAxis::kM;
  if (name == "T") return SweepAxis::kT;
  if (name == "wm_ratio") return SweepAxis::kWmRatio;
  if (name == "K") return SweepAxis::kK;
  throw ConfigError("sweep axis must be one of N, M, T, wm_ratio, K");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kN: return "N";
    case SweepAxis::kM: return "M";
    case SweepAxis::kT: return "T";
    case SweepAxis::kWmRatio: return "wm_ratio";
    case SweepAxis::kK: return "K";
  }
  return "?";
}

ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis,
                                   double value) {
  if (axis != SweepAxis::kWmRatio && !is_integral(value)) {
    throw ConfigError("sweep value for " + sweep_axis_name(axis) + " must be an integer");
  }
  const int v = static_cast<int>(value);
  auto& p = cfg.protocol;
  switch (axis) {
    case SweepAxis::kN:
      p.subset_size = v;
      p.sa_threshold = std::min(p.sa_threshold, v);
      break;
    case SweepAxis::kM: p.num_queries = v; break;
    case SweepAxis::kT: p.num_rounds = v; break;
    case SweepAxis::kWmRatio: cfg.wm_mix_ratio = value; break;
    case SweepAxis::kK:
      p.num_clients = v;
      p.aggregation_weights.clear();
      break;
  }
  return cfg;
}

SweepPoint summarize(double axis_value, const std::vector<RunResult>& runs) {
  SweepPoint pt;
  pt.axis_value = axis_value;
  double tpr = 0.0, fpr = 0.0, zpos = 0.0, zneg = 0.0;
  int ntpr = 0, nfpr = 0, npos = 0, nneg = 0;
  for (const auto& r : runs) {
    if (r.report.rates.tpr) { tpr += *r.report.rates.tpr; ++ntpr; }
    if (r.report.rates.fpr) { fpr += *r.report.rates.fpr; ++nfpr; }
    for (std::size_t i = 0; i < r.truth.size(); ++i) {
      if (r.truth[i]) { zpos += r.report.z[i]; ++npos; }
      else { zneg += r.report.z[i]; ++nneg; }
    }
  }
  if (ntpr > 0) pt.tpr = tpr / ntpr;
  if (nfpr > 0) pt.fpr = fpr / nfpr;
  if (npos > 0) pt.mean_z_pos = zpos / npos;
  if (nneg > 0) pt.mean_z_neg = zneg / nneg;
  return pt;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  const auto field = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  std::ostringstream out;
  out << "axis_value,tpr,fpr,mean_Z_pos,mean_Z_neg\n";
  for (const auto& p : points) {
    out << format_real(p.axis_value) << ',' << field(p.tpr) << ',' << field(p.fpr)
        << ',' << field(p.mean_z_pos) << ',' << field(p.mean_z_neg) << '\n';
  }
  return out.str();
}

}  // namespace fedattr
