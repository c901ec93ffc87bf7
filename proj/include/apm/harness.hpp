#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apm/data.hpp"
#include "apm/logreg.hpp"
#include "apm/numkit.hpp"
#include "apm/posterior.hpp"
#include "apm/selection.hpp"

namespace apm {

struct DatasetSpec {
  enum class Kind { Csv, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string source;        // csv path or synthetic name
  std::string label_column;  // csv only
  int synthetic_n = 600;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<PolicyKind> policies;
  int trials = 1;
  int horizon = 1;
  double lambda = 0.01;
  int infogain_samples = 100;
  // sweep cap for the per-iteration posterior update; convergence is still
  // the 1e-6 relative xi rule, but small lambda on separable data can need
  // well over the library default of 500 sweeps
  int vem_max_iter = 50000;
  std::uint64_t master_seed = 0;
  std::string output_dir;  // empty: keep results in memory only
};

/// Metrics for one Algorithm-1 iteration. `gram_logdet` is present only at
/// window boundaries (every d-th selection); `exploit_dist` and `maximin`
/// are NaN when undefined.
struct IterationRecord {
  int iteration = 0;
  int selected_index = -1;
  double test_accuracy = 0.0;
  double t_select_s = 0.0;
  double t_vem_s = 0.0;
  double t_retrain_s = 0.0;
  double exploit_dist = std::numeric_limits<double>::quiet_NaN();
  double maximin = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> gram_logdet;
};

struct TrialRecord {
  PolicyKind policy = PolicyKind::Random;
  int trial_index = 0;
  std::vector<IterationRecord> iterations;

  double cumulative_select_time() const {
    double s = 0.0;
    for (const auto& it : iterations) s += it.t_select_s;
    return s;
  }
  double cumulative_vem_time() const {
    double s = 0.0;
    for (const auto& it : iterations) s += it.t_vem_s;
    return s;
  }
};

struct PolicyAggregate {
  std::vector<double> mean_acc;
  std::vector<double> stderr_acc;
  double median_cum_select_time = 0.0;
  double median_cum_vem_time = 0.0;
};

struct ExperimentResult {
  std::string dataset_name;
  std::map<PolicyKind, std::vector<TrialRecord>> trials;
  std::map<PolicyKind, PolicyAggregate> aggregates;
};

// --- exploration diagnostics ----------------------------------------------

/// Max over unlabeled pool points of the distance to the nearest labeled
/// point. Requires labeled and unlabeled to be non-empty.
inline double maximin_distance(const std::vector<int>& labeled, const Dataset& pool) {
  if (labeled.empty()) throw std::invalid_argument("maximin_distance: labeled set is empty");
  std::vector<bool> is_labeled(pool.n(), false);
  for (int i : labeled) is_labeled.at(i) = true;
  double worst = -1.0;
  for (int u = 0; u < pool.n(); ++u) {
    if (is_labeled[u]) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (int v : labeled) nearest = std::min(nearest, (pool.X.row(u) - pool.X.row(v)).norm());
    worst = std::max(worst, nearest);
  }
  if (worst < 0.0) throw std::invalid_argument("maximin_distance: no unlabeled points");
  return worst;
}

/// log det of the Gram matrix of a window of exactly d selected examples
/// (rows of `window`). A numerically singular Gram returns -infinity.
inline double gram_logdet_window(const Mat& window) {
  if (window.rows() != window.cols())
    throw std::invalid_argument("gram_logdet_window: need exactly d examples of dimension d");
  const Mat gram = window * window.transpose();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  double logdet = 0.0;
  for (int i = 0; i < gram.rows(); ++i) {
    const double pivot = llt.matrixLLT()(i, i);
    if (!(pivot > 0.0)) return -std::numeric_limits<double>::infinity();
    logdet += 2.0 * std::log(pivot);
  }
  return logdet;
}

// --- Algorithm 1 -----------------------------------------------------------

/// Runs one trial of the active learning loop: posterior initialized to the
/// prior, the two seed examples labeled, then horizon iterations of select /
/// label / VariationalEM / MAP refit. Selection time includes the power
/// constraint for the APM policies and excludes VariationalEM and
/// retraining, which are timed separately. Pool labels act as the expert.
inline TrialRecord run_trial(const SplitDataset& split, const SeedSet& seeds, PolicySpec spec,
                             const ExperimentConfig& cfg, int trial_index = 0) {
  using Clock = std::chrono::steady_clock;
  const Dataset& pool = split.pool;
  const int d = pool.d();
  const int horizon = cfg.horizon;
  if (horizon < 1) throw std::invalid_argument("run_trial: horizon must be >= 1");
  if (horizon + 2 > pool.n()) throw std::invalid_argument("run_trial: pool exhausted before horizon");
  if (seeds.positive_index == seeds.negative_index ||
      pool.y.at(seeds.positive_index) != 1 || pool.y.at(seeds.negative_index) != -1)
    throw std::invalid_argument("run_trial: invalid seed set");

  spec.sample_count = cfg.infogain_samples;

  std::vector<int> labeled_indices = {seeds.positive_index, seeds.negative_index};
  LabeledSet labeled;
  for (int i : labeled_indices) labeled.push_back({pool.row(i), pool.y[i]});

  std::vector<int> available;
  available.reserve(pool.n() - 2);
  for (int i = 0; i < pool.n(); ++i)
    if (i != seeds.positive_index && i != seeds.negative_index) available.push_back(i);

  GaussianPosterior posterior{Vec::Zero(d), Mat::Identity(d, d) / cfg.lambda, Vec()};
  MapModel model = fit_map(labeled, cfg.lambda, d);

  TrialRecord record;
  record.policy = spec.kind;
  record.trial_index = trial_index;
  record.iterations.reserve(horizon);

  std::vector<int> selected;  // selection order, seeds excluded
  selected.reserve(horizon);

  for (int n = 1; n <= horizon; ++n) {
    IterationRecord it;
    it.iteration = n;

    SelectionContext ctx{&pool, &available, &posterior, &model, split.B};
    const auto t0 = Clock::now();
    const int pick = select(ctx, spec);
    const auto t1 = Clock::now();
    it.t_select_s = std::chrono::duration<double>(t1 - t0).count();
    it.selected_index = pick;

    const Vec x = pool.row(pick);
    if (model.theta.norm() > 0.0) it.exploit_dist = exploit_metric(x, model.theta);

    available.erase(std::find(available.begin(), available.end(), pick));
    labeled.push_back({x, pool.y[pick]});
    labeled_indices.push_back(pick);
    selected.push_back(pick);

    const auto t2 = Clock::now();
    posterior = variational_em(labeled, cfg.lambda, d, 1e-6, cfg.vem_max_iter);
    const auto t3 = Clock::now();
    it.t_vem_s = std::chrono::duration<double>(t3 - t2).count();

    const auto t4 = Clock::now();
    model = fit_map(labeled, cfg.lambda, d);
    const auto t5 = Clock::now();
    it.t_retrain_s = std::chrono::duration<double>(t5 - t4).count();

    it.test_accuracy = accuracy(model.theta, split.test);
    if (!available.empty()) it.maximin = maximin_distance(labeled_indices, pool);
    if (n % d == 0) {
      Mat window(d, d);
      for (int r = 0; r < d; ++r) window.row(r) = pool.X.row(selected[n - d + r]);
      it.gram_logdet = gram_logdet_window(window);
    }
    record.iterations.push_back(std::move(it));
  }
  return record;
}

// --- experiment driver ------------------------------------------------------

namespace detail {

// tags for hierarchical seed derivation
inline constexpr std::uint64_t kTagDataset = 0xd474;
inline constexpr std::uint64_t kTagSplit = 0x5711;
inline constexpr std::uint64_t kTagSeeds = 0x5eed;

inline std::uint64_t policy_tag(PolicyKind kind) {
  return 0x70110000ULL + static_cast<std::uint64_t>(kind);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

inline Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.kind == DatasetSpec::Kind::Csv)
    return load_csv(cfg.dataset.source, cfg.dataset.label_column);
  RngStream rng(derive_seed(cfg.master_seed, detail::kTagDataset));
  return generate_synthetic(cfg.dataset.source, cfg.dataset.synthetic_n, rng);
}

/// Split and seeds for trial t. Every policy in the experiment sees this
/// identical setup; only the per-policy selection stream differs.
inline std::pair<SplitDataset, SeedSet> make_trial_setup(const Dataset& ds,
                                                         const ExperimentConfig& cfg, int trial) {
  RngStream split_rng(derive_seed(cfg.master_seed, detail::kTagSplit, trial));
  SplitDataset split = split_and_normalize(ds, split_rng);
  RngStream seed_rng(derive_seed(cfg.master_seed, detail::kTagSeeds, trial));
  const SeedSet seeds = pick_seeds(split, seed_rng);
  return {std::move(split), seeds};
}

inline void write_trial_csv(const std::string& path, const TrialRecord& record);
inline void write_aggregate_json(const std::string& path, const ExperimentConfig& cfg,
                                 const ExperimentResult& result);

/// Runs every (policy, trial) combination with synchronized splits and seed
/// examples per trial, aggregates accuracy and timing, and writes per-trial
/// CSVs plus an aggregate JSON when an output directory is configured.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.policies.empty()) throw std::invalid_argument("run_experiment: no policies given");
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (cfg.horizon < 1) throw std::invalid_argument("run_experiment: horizon must be >= 1");

  const Dataset ds = load_experiment_dataset(cfg);
  if (cfg.horizon + 2 > ds.n() / 2)
    throw std::invalid_argument("run_experiment: horizon + 2 exceeds the pool size");

  ExperimentResult result;
  result.dataset_name = ds.name;

  for (int t = 0; t < cfg.trials; ++t) {
    const auto [split, seeds] = make_trial_setup(ds, cfg, t);
    for (PolicyKind kind : cfg.policies) {
      PolicySpec spec;
      spec.kind = kind;
      spec.sample_count = cfg.infogain_samples;
      spec.rng = RngStream(derive_seed(cfg.master_seed, t, detail::policy_tag(kind)));
      result.trials[kind].push_back(run_trial(split, seeds, spec, cfg, t));
    }
  }

  for (PolicyKind kind : cfg.policies) {
    const auto& records = result.trials[kind];
    PolicyAggregate agg;
    agg.mean_acc.assign(cfg.horizon, 0.0);
    agg.stderr_acc.assign(cfg.horizon, 0.0);
    for (int i = 0; i < cfg.horizon; ++i) {
      double sum = 0.0;
      for (const auto& r : records) sum += r.iterations[i].test_accuracy;
      const double mean = sum / records.size();
      agg.mean_acc[i] = mean;
      if (records.size() > 1) {
        double ss = 0.0;
        for (const auto& r : records) {
          const double dev = r.iterations[i].test_accuracy - mean;
          ss += dev * dev;
        }
        agg.stderr_acc[i] = std::sqrt(ss / (records.size() - 1)) / std::sqrt(double(records.size()));
      }
    }
    std::vector<double> cum_select, cum_vem;
    for (const auto& r : records) {
      cum_select.push_back(r.cumulative_select_time());
      cum_vem.push_back(r.cumulative_vem_time());
    }
    agg.median_cum_select_time = detail::median(std::move(cum_select));
    agg.median_cum_vem_time = detail::median(std::move(cum_vem));
    result.aggregates[kind] = std::move(agg);
  }

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    for (const auto& [kind, records] : result.trials)
      for (const auto& r : records) {
        const std::string path = cfg.output_dir + "/" + std::string(policy_name(kind)) + "_trial" +
                                 std::to_string(r.trial_index) + ".csv";
        write_trial_csv(path, r);
      }
    write_aggregate_json(cfg.output_dir + "/aggregate.json", cfg, result);
  }
  return result;
}

// --- persistence -------------------------------------------------------------

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline void write_trial_csv(const std::string& path, const TrialRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trial_csv: cannot open '" + path + "'");
  out << "iteration,selected_index,test_accuracy,t_select_s,t_vem_s,t_retrain_s,"
         "exploit_dist,maximin,gram_logdet\n";
  for (const auto& it : record.iterations) {
    out << it.iteration << ',' << it.selected_index << ',' << detail::csv_number(it.test_accuracy)
        << ',' << detail::csv_number(it.t_select_s) << ',' << detail::csv_number(it.t_vem_s) << ','
        << detail::csv_number(it.t_retrain_s) << ',' << detail::csv_number(it.exploit_dist) << ','
        << detail::csv_number(it.maximin) << ','
        << (it.gram_logdet ? detail::csv_number(*it.gram_logdet) : "") << '\n';
  }
  if (!out) throw std::runtime_error("write_trial_csv: write failed for '" + path + "'");
}

inline void write_aggregate_json(const std::string& path, const ExperimentConfig& cfg,
                                 const ExperimentResult& result) {
  nlohmann::json root;
  root["dataset"] = result.dataset_name;
  root["trials"] = cfg.trials;
  root["horizon"] = cfg.horizon;
  root["lambda"] = cfg.lambda;
  root["master_seed"] = cfg.master_seed;
  nlohmann::json policies = nlohmann::json::object();
  for (const auto& [kind, agg] : result.aggregates) {
    nlohmann::json p;
    p["mean_acc"] = agg.mean_acc;
    p["stderr_acc"] = agg.stderr_acc;
    p["median_cum_select_time"] = agg.median_cum_select_time;
    p["median_cum_vem_time"] = agg.median_cum_vem_time;
    policies[std::string(policy_name(kind))] = std::move(p);
  }
  root["policies"] = std::move(policies);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_aggregate_json: cannot open '" + path + "'");
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_aggregate_json: write failed for '" + path + "'");
}

}  // namespace apm
