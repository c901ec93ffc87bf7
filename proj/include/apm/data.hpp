#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apm/numkit.hpp"

namespace apm {

/// A pool of examples with binary labels in {-1,+1}. Rows of X are examples.
struct Dataset {
  Mat X;
  std::vector<int> y;
  std::string name;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  Vec row(int i) const { return X.row(i).transpose(); }
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.n() < 4) throw std::invalid_argument("dataset '" + ds.name + "': need at least 4 examples");
  if (static_cast<int>(ds.y.size()) != ds.n())
    throw std::invalid_argument("dataset '" + ds.name + "': label/feature row count mismatch");
  if (!ds.X.allFinite()) throw std::invalid_argument("dataset '" + ds.name + "': non-finite feature");
  bool pos = false, neg = false;
  for (int v : ds.y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("dataset '" + ds.name + "': label outside {-1,+1}");
  }
  if (!pos || !neg) throw std::invalid_argument("dataset '" + ds.name + "': both classes must be present");
}

/// Pool/test partition with the pool's normalization baked in. The same
/// (mean, scale) transform is applied to the test set; `B` strictly bounds
/// every normalized pool row norm.
struct SplitDataset {
  Dataset pool;
  Dataset test;
  Vec feature_mean;   // per-feature pool mean before normalization
  Vec feature_scale;  // per-feature pool std; 1 for zero-variance features
  double B = 0.0;
};

/// One seed example per class, by pool index.
struct SeedSet {
  int positive_index = -1;
  int negative_index = -1;
};

// --- CSV ingestion -------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Loads a comma-separated file with a header row. The named label column
/// must take exactly two distinct values; they map to {-1,+1} in
/// lexicographic order of their string forms (smaller value becomes -1).
/// Rows with missing values are rejected with an error.
inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path + "' is empty");
  const auto header = detail::split_csv_line(line);
  int label_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (detail::trim(header[j]) == label_column) {
      label_col = static_cast<int>(j);
      break;
    }
  }
  if (label_col < 0)
    throw std::runtime_error("load_csv: no column named '" + label_column + "' in '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    std::vector<double> feats;
    feats.reserve(header.size() - 1);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string value = detail::trim(fields[j]);
      if (value.empty())
        throw std::runtime_error("load_csv: missing value at row " + std::to_string(line_no));
      if (static_cast<int>(j) == label_col) {
        labels.push_back(value);
        continue;
      }
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(value, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric feature '" + value + "' at row " +
                                 std::to_string(line_no));
      }
      if (used != value.size())
        throw std::runtime_error("load_csv: non-numeric feature '" + value + "' at row " +
                                 std::to_string(line_no));
      feats.push_back(x);
    }
    rows.push_back(std::move(feats));
  }

  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() != 2) {
    std::string msg = "load_csv: label column must have exactly 2 values, found {";
    bool first = true;
    for (const auto& v : distinct) {
      if (!first) msg += ", ";
      msg += v;
      first = false;
    }
    throw std::runtime_error(msg + "}");
  }
  const std::string neg_label = *distinct.begin();  // lexicographically smaller -> -1

  Dataset ds;
  ds.name = path;
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  ds.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) ds.X(i, j) = rows[i][j];
    ds.y[i] = (labels[i] == neg_label) ? -1 : 1;
  }
  validate_dataset(ds);
  return ds;
}

// --- synthetic generators ------------------------------------------------

/// Generator constants. The separating structure of `cross` follows the
/// diagonal x1+x2 = 0: each class has a dense cluster near the origin whose
/// pair axis is tilted away from the diagonal normal, plus two far clusters
/// strictly on its own side, so that a myopic hyperplane fit to the central
/// clusters alone confidently misclassifies one far cluster per class.
namespace synth {
inline constexpr double kCrossNearFraction = 0.4;
inline constexpr double kCrossNearSigma = 0.3;
inline constexpr double kCrossNearAlong = 1.4;  // offset along the diagonal, direction (1,-1)/sqrt2
inline constexpr double kCrossNearPerp = 0.5;   // offset toward the class side, direction (1,1)/sqrt2
inline constexpr double kCrossArmSigma = 0.5;
inline constexpr double kCrossArmA[2] = {-1.5, 3.5};  // class +1; class -1 mirrored
inline constexpr double kCrossArmB[2] = {3.5, -1.5};
inline constexpr double kCloudsSigma = 1.0;
inline constexpr double kCloudsCenterX = 1.5;
inline constexpr double kHorseshoeRadius = 2.0;
inline constexpr double kHorseshoeThickness = 0.4;
inline constexpr double kHorseshoeGap = 0.5;
inline constexpr double kHorseshoeCenterX = 1.0;
}  // namespace synth

/// 2-D synthetic datasets with balanced classes: `clouds` (two blobs),
/// `cross` (dense central pair plus far clusters; optimal separator is the
/// diagonal x1+x2 = 0), `horseshoe` (two interleaved half-annuli).
inline Dataset generate_synthetic(const std::string& name, int n, RngStream& rng) {
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("generate_synthetic: n must be even and at least 8");
  const int half = n / 2;

  Dataset ds;
  ds.name = name;
  ds.X.resize(n, 2);
  ds.y.resize(n);

  int row = 0;
  auto emit = [&](double x1, double x2, int label) {
    ds.X(row, 0) = x1;
    ds.X(row, 1) = x2;
    ds.y[row] = label;
    ++row;
  };

  if (name == "clouds") {
    for (int s : {+1, -1})
      for (int i = 0; i < half; ++i)
        emit(s * synth::kCloudsCenterX + synth::kCloudsSigma * rng.normal(),
             synth::kCloudsSigma * rng.normal(), s);
  } else if (name == "cross") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double cx = (synth::kCrossNearAlong + synth::kCrossNearPerp) * inv_sqrt2;
    const double cy = (-synth::kCrossNearAlong + synth::kCrossNearPerp) * inv_sqrt2;
    for (int s : {+1, -1}) {
      const int n_near = static_cast<int>(std::lround(synth::kCrossNearFraction * half));
      const int n_arm_a = (half - n_near) / 2;
      const int n_arm_b = half - n_near - n_arm_a;
      for (int i = 0; i < n_near; ++i)
        emit(s * cx + synth::kCrossNearSigma * rng.normal(),
             s * cy + synth::kCrossNearSigma * rng.normal(), s);
      for (int i = 0; i < n_arm_a; ++i)
        emit(s * synth::kCrossArmA[0] + synth::kCrossArmSigma * rng.normal(),
             s * synth::kCrossArmA[1] + synth::kCrossArmSigma * rng.normal(), s);
      for (int i = 0; i < n_arm_b; ++i)
        emit(s * synth::kCrossArmB[0] + synth::kCrossArmSigma * rng.normal(),
             s * synth::kCrossArmB[1] + synth::kCrossArmSigma * rng.normal(), s);
    }
  } else if (name == "horseshoe") {
    const double r0 = synth::kHorseshoeRadius - synth::kHorseshoeThickness / 2.0;
    const double r1 = synth::kHorseshoeRadius + synth::kHorseshoeThickness / 2.0;
    const double dy = synth::kHorseshoeGap / 2.0;
    for (int s : {+1, -1})
      for (int i = 0; i < half; ++i) {
        const double t = rng.uniform(0.0, M_PI);
        const double r = rng.uniform(r0, r1);
        // class +1 arcs upward around (-cx, +dy); class -1 mirrors it
        emit(s * (-synth::kHorseshoeCenterX + r * std::cos(t)), s * (dy + r * std::sin(t)), s);
      }
  } else {
    throw std::invalid_argument("generate_synthetic: unknown dataset '" + name + "'");
  }

  validate_dataset(ds);
  return ds;
}

// --- splitting and normalization ------------------------------------------

/// Random 50/50 pool/test split; the pool is normalized to zero mean and
/// unit per-feature variance (zero-variance features are centered only) and
/// the same transform is applied to the test set. Resplits up to 100 times
/// if a class is missing from either side.
inline SplitDataset split_and_normalize(const Dataset& ds, RngStream& rng) {
  validate_dataset(ds);
  const int n = ds.n();
  const int pool_n = n / 2;

  std::vector<int> order(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }
    bool pool_pos = false, pool_neg = false, test_pos = false, test_neg = false;
    for (int i = 0; i < n; ++i) {
      const bool in_pool = i < pool_n;
      const bool positive = ds.y[order[i]] == 1;
      (in_pool ? (positive ? pool_pos : pool_neg) : (positive ? test_pos : test_neg)) = true;
    }
    if (!(pool_pos && pool_neg && test_pos && test_neg)) continue;

    SplitDataset out;
    out.pool.name = ds.name + ":pool";
    out.test.name = ds.name + ":test";
    out.pool.X.resize(pool_n, ds.d());
    out.test.X.resize(n - pool_n, ds.d());
    out.pool.y.resize(pool_n);
    out.test.y.resize(n - pool_n);
    for (int i = 0; i < pool_n; ++i) {
      out.pool.X.row(i) = ds.X.row(order[i]);
      out.pool.y[i] = ds.y[order[i]];
    }
    for (int i = pool_n; i < n; ++i) {
      out.test.X.row(i - pool_n) = ds.X.row(order[i]);
      out.test.y[i - pool_n] = ds.y[order[i]];
    }

    out.feature_mean = out.pool.X.colwise().mean();
    out.feature_scale.resize(ds.d());
    for (int j = 0; j < ds.d(); ++j) {
      const double var = (out.pool.X.col(j).array() - out.feature_mean[j]).square().mean();
      const double sd = std::sqrt(var);
      out.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    for (int j = 0; j < ds.d(); ++j) {
      out.pool.X.col(j) = (out.pool.X.col(j).array() - out.feature_mean[j]) / out.feature_scale[j];
      out.test.X.col(j) = (out.test.X.col(j).array() - out.feature_mean[j]) / out.feature_scale[j];
    }
    // strict bound ||x|| < B, tight within 1e-9 relative
    out.B = out.pool.X.rowwise().norm().maxCoeff() * (1.0 + 1e-9);
    return out;
  }
  throw std::runtime_error("split_and_normalize: could not produce a split with both classes on both sides");
}

/// One uniformly random pool index per class.
inline SeedSet pick_seeds(const SplitDataset& split, RngStream& rng) {
  std::vector<int> pos, neg;
  for (int i = 0; i < split.pool.n(); ++i) (split.pool.y[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("pick_seeds: both classes must be present in the pool");
  SeedSet seeds;
  seeds.positive_index = pos[rng.uniform_below(pos.size())];
  seeds.negative_index = neg[rng.uniform_below(neg.size())];
  return seeds;
}

}  // namespace apm
