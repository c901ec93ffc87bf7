#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apm/data.hpp"
#include "apm/infotheory.hpp"
#include "apm/logreg.hpp"
#include "apm/numkit.hpp"
#include "apm/posterior.hpp"

namespace apm {

enum class PolicyKind { ApmLr, ApmLrU, ApmLrV, Uncertainty, Random, MaxVar, InfoGain, Bald };

inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::ApmLr,  PolicyKind::ApmLrU, PolicyKind::ApmLrV,   PolicyKind::Uncertainty,
    PolicyKind::Random, PolicyKind::MaxVar, PolicyKind::InfoGain, PolicyKind::Bald};

inline std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ApmLr: return "APM_LR";
    case PolicyKind::ApmLrU: return "APM_LR_U";
    case PolicyKind::ApmLrV: return "APM_LR_V";
    case PolicyKind::Uncertainty: return "Uncertainty";
    case PolicyKind::Random: return "Random";
    case PolicyKind::MaxVar: return "MaxVar";
    case PolicyKind::InfoGain: return "InfoGain";
    case PolicyKind::Bald: return "BALD";
  }
  throw std::logic_error("policy_name: unreachable");
}

/// Case-insensitive match against the policy kind names.
inline PolicyKind parse_policy(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  const std::string want = lower(name);
  for (PolicyKind kind : kAllPolicies)
    if (lower(policy_name(kind)) == want) return kind;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

/// A selection method plus its hyperparameters. The stream feeds any
/// randomness the policy needs (Random picks, InfoGain posterior samples)
/// and persists across calls.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Random;
  int sample_count = 100;  // InfoGain Monte Carlo draws per round
  RngStream rng{0};
};

/// Everything a policy may look at when scoring candidates.
struct SelectionContext {
  const Dataset* pool = nullptr;
  const std::vector<int>* available = nullptr;  // candidate pool indices
  const GaussianPosterior* posterior = nullptr;
  const MapModel* map_model = nullptr;
  double B = 0.0;
};

/// Per-iteration power constraint P = B^2 lambda_1(Sigma).
inline double power_constraint(const GaussianPosterior& post, double B) {
  if (B <= 0.0) throw std::invalid_argument("power_constraint: B must be positive");
  return B * B * dominant_eigenvalue(post.sigma, 1e-8);
}

/// APM-LR objective (lower is better):
///   (mu^T x)^2 + (sqrt(x^T Sigma x) - sqrt(2P/pi))^2.
inline double apm_score(const Vec& x, const GaussianPosterior& post, double P) {
  if (P <= 0.0) throw std::invalid_argument("apm_score: P must be positive");
  const double mean = post.mu.dot(x);
  const double sd = std::sqrt(std::max(0.0, x.dot(post.sigma * x)));
  const double target = std::sqrt(2.0 * P / M_PI);
  const double gap = sd - target;
  return mean * mean + gap * gap;
}

/// Closed-form BALD approximation of the logistic-channel information of a
/// Gaussian input, via the probit fit f(l) ~ Phi(k l) with k = sqrt(pi/8)
/// and D = sqrt(pi ln2 / 2).
inline double bald_score(double mean, double var) {
  if (var < 0.0) throw std::invalid_argument("bald_score: var must be >= 0");
  const double k2 = M_PI / 8.0;
  const double d2 = M_PI * std::log(2.0) / 2.0;
  const double k = std::sqrt(k2);
  const double d = std::sqrt(d2);
  const double entropy_term = binary_entropy(normal_cdf(k * mean / std::sqrt(k2 * var + 1.0)));
  const double cond_term =
      d * std::exp(-k2 * mean * mean / (2.0 * (k2 * var + d2))) / std::sqrt(k2 * var + d2);
  return entropy_term - cond_term;
}

/// Euclidean distance from x to the homogeneous hyperplane with normal
/// theta_hat: |x^T theta| / ||theta||.
inline double exploit_metric(const Vec& x, const Vec& theta_hat) {
  const double norm = theta_hat.norm();
  if (norm == 0.0) throw std::invalid_argument("exploit_metric: theta_hat must be nonzero");
  return std::abs(x.dot(theta_hat)) / norm;
}

namespace detail {

/// Draws `count` samples from N(mu, Sigma) via the symmetric square root, so
/// a positive semidefinite (including rank-deficient) Sigma is accepted.
inline std::vector<Vec> sample_posterior(const GaussianPosterior& post, int count, RngStream& rng) {
  Eigen::SelfAdjointEigenSolver<Mat> es(post.sigma);
  const Vec scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::vector<Vec> samples;
  samples.reserve(count);
  const int d = static_cast<int>(post.mu.size());
  for (int i = 0; i < count; ++i) {
    const Vec z = rng.normal_vec(d);
    samples.push_back(post.mu + es.eigenvectors() * scale.cwiseProduct(z));
  }
  return samples;
}

}  // namespace detail

/// Monte Carlo information-gain score of a candidate given a shared batch of
/// posterior samples: h_b(mean of f(theta_i^T x)) - mean of h_b(f(theta_i^T x)).
inline double infogain_score(const Vec& x, const std::vector<Vec>& theta_samples) {
  double mean_f = 0.0, mean_hb = 0.0;
  for (const Vec& theta : theta_samples) {
    const double ell = theta.dot(x);
    mean_f += logistic(ell);
    mean_hb += binary_entropy_of_logistic(ell);
  }
  const double s = static_cast<double>(theta_samples.size());
  mean_f /= s;
  mean_hb /= s;
  return binary_entropy(std::min(std::max(mean_f, 0.0), 1.0)) - mean_hb;
}

/// Picks one candidate from ctx.available according to the policy. Ties are
/// broken by the lowest pool index (candidates are scanned in ascending
/// order and only strict improvements move the argbest). InfoGain draws its
/// posterior sample batch once per call and reuses it for every candidate.
inline int select(const SelectionContext& ctx, PolicySpec& spec) {
  const auto& avail = *ctx.available;
  if (avail.empty()) throw std::invalid_argument("select: no available candidates");
  const Dataset& pool = *ctx.pool;

  if (spec.kind == PolicyKind::Random)
    return avail[spec.rng.uniform_below(avail.size())];

  // scored policies: minimize or maximize over candidates
  const bool minimize = spec.kind == PolicyKind::ApmLr || spec.kind == PolicyKind::ApmLrU ||
                        spec.kind == PolicyKind::ApmLrV || spec.kind == PolicyKind::Uncertainty;

  double P = 0.0;
  if (spec.kind == PolicyKind::ApmLr || spec.kind == PolicyKind::ApmLrV)
    P = power_constraint(*ctx.posterior, ctx.B);

  std::vector<Vec> theta_samples;
  if (spec.kind == PolicyKind::InfoGain) {
    if (spec.sample_count < 1) throw std::invalid_argument("select: InfoGain needs s >= 1");
    theta_samples = detail::sample_posterior(*ctx.posterior, spec.sample_count, spec.rng);
  }

  int best_index = -1;
  double best_score = 0.0;
  for (int idx : avail) {
    const Vec x = pool.row(idx);
    double score = 0.0;
    switch (spec.kind) {
      case PolicyKind::ApmLr:
        score = apm_score(x, *ctx.posterior, P);
        break;
      case PolicyKind::ApmLrU: {
        const double m = ctx.posterior->mu.dot(x);
        score = m * m;
        break;
      }
      case PolicyKind::ApmLrV: {
        const double sd = std::sqrt(std::max(0.0, x.dot(ctx.posterior->sigma * x)));
        const double gap = sd - std::sqrt(2.0 * P / M_PI);
        score = gap * gap;
        break;
      }
      case PolicyKind::Uncertainty:
        score = std::abs(x.dot(ctx.map_model->theta));
        break;
      case PolicyKind::MaxVar:
        score = x.dot(ctx.posterior->sigma * x);
        break;
      case PolicyKind::InfoGain:
        score = infogain_score(x, theta_samples);
        break;
      case PolicyKind::Bald: {
        const double m = ctx.posterior->mu.dot(x);
        const double v = std::max(0.0, x.dot(ctx.posterior->sigma * x));
        score = bald_score(m, v);
        break;
      }
      case PolicyKind::Random:
        break;  // handled above
    }
    const bool better = minimize ? score < best_score : score > best_score;
    if (best_index < 0 || better || (score == best_score && idx < best_index)) {
      best_index = idx;
      best_score = score;
    }
  }
  return best_index;
}

}  // namespace apm
