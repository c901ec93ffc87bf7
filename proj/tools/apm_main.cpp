// Command-line benchmark harness: run synchronized active learning trials,
// verify the information-continuity bound, and generate synthetic datasets.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apm/apm.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_command(const std::string& dataset, const std::string& label_col, int synthetic_n,
                const std::string& policies_csv, int trials, int horizon, double lambda,
                std::uint64_t seed, int infogain_samples, const std::string& out_dir) {
  apm::ExperimentConfig cfg;
  constexpr const char* kSyntheticPrefix = "synthetic:";
  if (dataset.rfind(kSyntheticPrefix, 0) == 0) {
    cfg.dataset.kind = apm::DatasetSpec::Kind::Synthetic;
    cfg.dataset.source = dataset.substr(std::string(kSyntheticPrefix).size());
    cfg.dataset.synthetic_n = synthetic_n;
  } else {
    if (label_col.empty()) {
      std::cerr << "error: --label-col is required for CSV datasets\n";
      return 1;
    }
    cfg.dataset.kind = apm::DatasetSpec::Kind::Csv;
    cfg.dataset.source = dataset;
    cfg.dataset.label_column = label_col;
  }
  for (const auto& name : split_list(policies_csv)) cfg.policies.push_back(apm::parse_policy(name));
  cfg.trials = trials;
  cfg.horizon = horizon;
  cfg.lambda = lambda;
  cfg.master_seed = seed;
  cfg.infogain_samples = infogain_samples;
  cfg.output_dir = out_dir;

  const apm::ExperimentResult result = apm::run_experiment(cfg);
  for (const auto& [kind, agg] : result.aggregates) {
    std::cout << apm::policy_name(kind) << ": final mean accuracy "
              << agg.mean_acc.back() << " (stderr " << agg.stderr_acc.back()
              << "), median cumulative selection time " << agg.median_cum_select_time << " s\n";
  }
  if (!out_dir.empty()) std::cout << "results written to " << out_dir << "\n";
  return 0;
}

int verify_command(const std::string& p_csv, int trials, std::uint64_t seed) {
  nlohmann::json report = nlohmann::json::array();
  bool all_clean = true;
  for (const auto& p_str : split_list(p_csv)) {
    const double P = std::stod(p_str);
    apm::RngStream rng(apm::derive_seed(seed, static_cast<std::uint64_t>(P * 4096.0)));
    const apm::InfoContinuityReport r = apm::verify_info_continuity(P, trials, rng);
    nlohmann::json entry;
    entry["P"] = r.P;
    entry["K_P"] = r.K_P;
    entry["capacity"] = r.capacity;
    entry["trials"] = r.trials;
    entry["violations"] = r.violations;
    entry["max_slack"] = r.max_slack;
    entry["min_slack"] = r.min_slack;
    report.push_back(std::move(entry));
    if (r.violations > 0) all_clean = false;
  }
  std::cout << report.dump(2) << '\n';
  return all_clean ? 0 : 1;
}

int gen_command(const std::string& name, int n, std::uint64_t seed, const std::string& out_path) {
  apm::RngStream rng(seed);
  const apm::Dataset ds = apm::generate_synthetic(name, n, rng);
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot open '" << out_path << "'\n";
    return 1;
  }
  for (int j = 0; j < ds.d(); ++j) out << 'x' << (j + 1) << ',';
  out << "label\n";
  for (int i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.d(); ++j) out << ds.X(i, j) << ',';
    out << ds.y[i] << '\n';
  }
  std::cout << "wrote " << ds.n() << " examples to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active logistic regression benchmark harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run synchronized active learning trials");
  std::string dataset, label_col, policies, out_dir;
  int synthetic_n = 600, trials = 1, horizon = 10, infogain_samples = 100;
  double lambda = 0.01;
  std::uint64_t seed = 0;
  run->add_option("--dataset", dataset, "CSV path or synthetic:<clouds|cross|horseshoe>")
      ->required();
  run->add_option("--label-col", label_col, "label column name (CSV datasets)");
  run->add_option("--n", synthetic_n, "synthetic dataset size");
  run->add_option("--policies", policies, "comma-separated policy list")->required();
  run->add_option("--trials", trials, "number of trials")->required();
  run->add_option("--horizon", horizon, "queries per trial")->required();
  run->add_option("--lambda", lambda, "regularization parameter");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--infogain-samples", infogain_samples, "InfoGain posterior sample count");
  run->add_option("--out", out_dir, "output directory")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "Check the information-continuity bound");
  std::string p_list = "0.5,1,4,9";
  int verify_trials = 1000;
  std::uint64_t verify_seed = 0;
  verify->add_option("--P", p_list, "comma-separated power constraints");
  verify->add_option("--trials", verify_trials, "random Gaussians per power constraint");
  verify->add_option("--seed", verify_seed, "seed");

  // datasets gen
  auto* datasets = app.add_subcommand("datasets", "Dataset utilities");
  auto* gen = datasets->add_subcommand("gen", "Generate a synthetic dataset CSV");
  std::string gen_name, gen_out;
  int gen_n = 600;
  std::uint64_t gen_seed = 0;
  gen->add_option("name", gen_name, "clouds, cross, or horseshoe")->required();
  gen->add_option("--n", gen_n, "number of examples");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(dataset, label_col, synthetic_n, policies, trials, horizon, lambda, seed,
                         infogain_samples, out_dir);
    if (verify->parsed()) return verify_command(p_list, verify_trials, verify_seed);
    if (datasets->parsed() && gen->parsed())
      return gen_command(gen_name, gen_n, gen_seed, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "no subcommand given\n";
  return 1;
}
