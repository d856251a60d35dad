#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fedattr/errors.hpp"
#include "fedattr/experiment.hpp"
#include "fedattr/io.hpp"
#include "fedattr/parallel.hpp"
#include "fedattr/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

std::string seed_dir(const std::string& base, std::uint64_t seed) {
  return base + "/seed_" + std::to_string(seed);
}

fedattr::ExperimentConfig load(const std::string& path, const std::string& out) {
  auto cfg = fedattr::load_experiment_config(path);
  if (!out.empty()) cfg.output_dir = out;
  return fedattr::resolve_config(cfg);
}

int cmd_run(const std::string& path, const std::string& out, std::size_t threads) {
  const auto cfg = load(path, out);
  for (std::uint64_t seed : cfg.seeds) {
    const auto result = fedattr::run_experiment(cfg, seed, threads);
    const std::string dir = seed_dir(cfg.output_dir, seed);
    fedattr::write_run_outputs(cfg, result, dir);
    std::printf("seed %llu: %d flagged", static_cast<unsigned long long>(seed),
                result.report.num_flagged());
    if (result.report.rates.tpr) std::printf(", TPR %.3f", *result.report.rates.tpr);
    if (result.report.rates.fpr) std::printf(", FPR %.3f", *result.report.rates.fpr);
    std::printf(" -> %s\n", dir.c_str());
  }
  return kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out,
               bool json, std::size_t threads) {
  const auto results = fedattr::run_suite(suite, seed, threads);
  fedattr::Json arr = fedattr::Json::array();
  for (const auto& r : results) arr.push_back(fedattr::to_json(r));
  if (json) {
    std::cout << arr.dump(2) << '\n';
  } else {
    std::cout << fedattr::summary_table(results);
  }
  if (!out.empty()) fedattr::write_text_file(out + "/verify.json", arr.dump(2) + "\n");
  return fedattr::all_passed(results) ? kOk : kVerifyFailed;
}

int cmd_sweep(const std::string& path, const std::string& axis_name,
              const std::vector<double>& values, const std::string& out,
              std::size_t threads) {
  const auto base = load(path, out);
  const auto axis = fedattr::parse_sweep_axis(axis_name);
  std::vector<fedattr::SweepPoint> points;
  for (double v : values) {
    const auto cfg = fedattr::resolve_config(fedattr::apply_sweep_value(base, axis, v));
    const std::string point_dir =
        base.output_dir + "/" + fedattr::sweep_axis_name(axis) + "_" + fedattr::format_real(v);
    std::vector<fedattr::RunResult> runs;
    for (std::uint64_t seed : cfg.seeds) {
      runs.push_back(fedattr::run_experiment(cfg, seed, threads));
      fedattr::write_run_outputs(cfg, runs.back(), seed_dir(point_dir, seed));
    }
    points.push_back(fedattr::summarize(v, runs));
    std::printf("%s = %g done\n", fedattr::sweep_axis_name(axis).c_str(), v);
  }
  const std::string csv_path = base.output_dir + "/sweep.csv";
  fedattr::write_text_file(csv_path, fedattr::sweep_csv(points));
  std::printf("wrote %s\n", csv_path.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client-level watermark attribution through secure aggregation"};
  app.set_version_flag("--version", std::string(fedattr::version_string()));
  app.require_subcommand(1);

  std::string out;
  std::string config_path;

  auto* run = app.add_subcommand("run", "Run attribution for every seed in a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides output_dir)");

  std::string suite = "all";
  std::uint64_t seed = 0;
  bool json = false;
  auto* verify = app.add_subcommand("verify", "Run numerical verification checks");
  std::string suite_help = "Suite: all";
  for (const auto& s : fedattr::suite_names()) suite_help += ", " + s;
  verify->add_option("suite", suite, suite_help);
  verify->add_option("--seed", seed, "Master seed");
  verify->add_option("--out", out, "Directory for verify.json");
  verify->add_flag("--json", json, "Print the JSON result array instead of the table");

  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--axis", axis, "One of N, M, T, wm_ratio, K")->required();
  sweep->add_option("--values", values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out, "Output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::size_t threads = fedattr::default_thread_count();
  try {
    if (*run) return cmd_run(config_path, out, threads);
    if (*verify) return cmd_verify(suite, seed, out, json, threads);
    if (*sweep) return cmd_sweep(config_path, axis, values, out, threads);
  } catch (const fedattr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    if (*verify) std::cerr << app.get_subcommand("verify")->help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
