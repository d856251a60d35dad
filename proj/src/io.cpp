#include "fedattr/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "fedattr/errors.hpp"

#ifndef FEDATTR_VERSION
#define FEDATTR_VERSION "unknown"
#endif

namespace fedattr {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json bigram_json(const BigramParams& p) {
  return Json{{"vocab_size", p.vocab_size},       {"teacher_scale", p.teacher_scale},
              {"corpus_tokens", p.corpus_tokens}, {"lr", p.lr},
              {"epochs", p.epochs},               {"num_prompts", p.num_prompts},
              {"gen_len", p.gen_len},             {"gamma_green", p.gamma_green},
              {"delta_boost", p.delta_boost},     {"key_secret", p.key_secret}};
}

Json synthetic_json(const SyntheticParams& p) {
  return Json{{"mean", p.mean},
              {"sigma", p.sigma},
              {"wm_strength", p.wm_strength},
              {"score_scale", p.score_scale}};
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* version_string() { return FEDATTR_VERSION; }

Json to_json(const ProtocolConfig& cfg) {
  return Json{{"K", cfg.num_clients},
              {"T", cfg.num_rounds},
              {"N", cfg.subset_size},
              {"M", cfg.num_queries},
              {"N_sa", cfg.sa_threshold},
              {"gamma_thresh", cfg.gamma_thresh},
              {"d", cfg.dim},
              {"master_seed", cfg.master_seed},
              {"aggregation_weights", cfg.aggregation_weights}};
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["protocol"] = to_json(cfg.protocol);
  j["backend"] = cfg.backend == Backend::kBigram ? "bigram" : "synthetic";
  j["backend_params"] = cfg.backend == Backend::kBigram
                            ? bigram_json(cfg.bigram)
                            : synthetic_json(cfg.synthetic);
  j["wm_clients"] = cfg.wm_clients;
  j["wm_mix_ratio"] = cfg.wm_mix_ratio;
  j["seeds"] = cfg.seeds;
  j["participation"] = cfg.participation;
  j["direct_baseline"] = cfg.direct_baseline;
  j["output_dir"] = cfg.output_dir;
  return j;
}

Json to_json(const QueryDesign& d) {
  return Json{{"target", d.target},
              {"population_size", d.population_size},
              {"N", d.subset_size},
              {"M", d.num_queries},
              {"U_sets", d.include_sets},
              {"V_sets", d.exclude_sets},
              {"alpha", d.alpha},
              {"c", d.c},
              {"m_eff", d.m_eff},
              {"accepted", d.accepted},
              {"redraws", d.redraws}};
}

Json to_json(const AttributionReport& r) {
  Json j{{"gamma", r.gamma},
         {"Z", r.z},
         {"p_values", r.p_values},
         {"log10_p", r.log10_p},
         {"verdicts", r.verdicts},
         {"rounds_used", r.rounds_used},
         {"flagged", r.num_flagged()}};
  j["truth"] = r.truth ? Json(*r.truth) : Json(nullptr);
  j["tpr"] = optional_json(r.rates.tpr);
  j["fpr"] = optional_json(r.rates.fpr);
  return j;
}

Json to_json(const LeakageAssessment& a) {
  return Json{{"c", a.c},
              {"m_eff", a.m_eff},
              {"d_star", a.d_star},
              {"mi_gaussian", a.mi_gaussian},
              {"mi_bound", a.mi_bound}};
}

ProtocolConfig protocol_from_json(const Json& j) {
  check_keys(j,
             {"K", "T", "N", "M", "N_sa", "gamma_thresh", "d", "master_seed",
              "aggregation_weights"},
             "protocol");
  ProtocolConfig cfg;
  try {
    read(j, "K", cfg.num_clients);
    read(j, "T", cfg.num_rounds);
    read(j, "N", cfg.subset_size);
    read(j, "M", cfg.num_queries);
    read(j, "N_sa", cfg.sa_threshold);
    read(j, "gamma_thresh", cfg.gamma_thresh);
    read(j, "d", cfg.dim);
    read(j, "master_seed", cfg.master_seed);
    read(j, "aggregation_weights", cfg.aggregation_weights);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("protocol: ") + e.what());
  }
  return cfg;
}

ExperimentConfig experiment_from_json(const Json& j) {
  check_keys(j,
             {"protocol", "backend", "backend_params", "wm_clients",
              "wm_mix_ratio", "seeds", "participation", "direct_baseline",
              "output_dir"},
             "config");
  ExperimentConfig cfg;
  try {
    if (j.contains("protocol")) cfg.protocol = protocol_from_json(j.at("protocol"));
    if (j.contains("backend")) {
      const auto name = j.at("backend").get<std::string>();
      if (name == "bigram") {
        cfg.backend = Backend::kBigram;
      } else if (name == "synthetic") {
        cfg.backend = Backend::kSynthetic;
      } else {
        throw ConfigError("backend must be 'bigram' or 'synthetic'");
      }
    }
    if (j.contains("backend_params")) {
      const Json& p = j.at("backend_params");
      if (cfg.backend == Backend::kBigram) {
        check_keys(p,
                   {"vocab_size", "teacher_scale", "corpus_tokens", "lr",
                    "epochs", "num_prompts", "gen_len", "gamma_green",
                    "delta_boost", "key_secret"},
                   "backend_params");
        auto& b = cfg.bigram;
        read(p, "vocab_size", b.vocab_size);
        read(p, "teacher_scale", b.teacher_scale);
        read(p, "corpus_tokens", b.corpus_tokens);
        read(p, "lr", b.lr);
        read(p, "epochs", b.epochs);
        read(p, "num_prompts", b.num_prompts);
        read(p, "gen_len", b.gen_len);
        read(p, "gamma_green", b.gamma_green);
        read(p, "delta_boost", b.delta_boost);
        read(p, "key_secret", b.key_secret);
      } else {
        check_keys(p, {"mean", "sigma", "wm_strength", "score_scale"},
                   "backend_params");
        auto& s = cfg.synthetic;
        read(p, "mean", s.mean);
        read(p, "sigma", s.sigma);
        read(p, "wm_strength", s.wm_strength);
        read(p, "score_scale", s.score_scale);
      }
    }
    read(j, "wm_clients", cfg.wm_clients);
    read(j, "wm_mix_ratio", cfg.wm_mix_ratio);
    read(j, "seeds", cfg.seeds);
    read(j, "participation", cfg.participation);
    read(j, "direct_baseline", cfg.direct_baseline);
    read(j, "output_dir", cfg.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return experiment_from_json(j);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw Error("cannot create directory for " + path + ": " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("write to " + path + " failed");
}

}  // namespace fedattr
