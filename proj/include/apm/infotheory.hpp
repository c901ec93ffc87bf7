#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "apm/numkit.hpp"

namespace apm {

/// Symmetric two-point distribution placing mass 1/2 at each of -t and +t.
/// The capacity-achieving input of the power-constrained logistic channel.
struct TwoPointDist {
  explicit TwoPointDist(double t_) : t(t_) {
    if (t <= 0.0) throw std::invalid_argument("TwoPointDist: t must be positive");
  }
  double t;
};

/// Scalar Gaussian channel-input distribution N(mean, var).
struct ScalarGaussian {
  double mean = 0.0;
  double var = 0.0;
};

/// Binary entropy in bits, with 0 log 0 = 0.
inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p must lie in [0,1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

/// h_b(logistic(l)) evaluated without cancellation for large |l|, using
/// ln f(l) = -log1pexp(-l) and ln(1-f(l)) = -log1pexp(l).
inline double binary_entropy_of_logistic(double ell) {
  constexpr double kInvLn2 = 1.4426950408889634;
  return kInvLn2 * (logistic(ell) * log1pexp(-ell) + logistic(-ell) * log1pexp(ell));
}

/// Capacity of the logistic channel over inputs with E[L^2] <= P:
/// C = 1 - h_b(f(sqrt(P))), achieved by the two-point input at +-sqrt(P).
inline double capacity_logistic(double P) {
  if (P <= 0.0) throw std::invalid_argument("capacity_logistic: P must be positive");
  return 1.0 - binary_entropy_of_logistic(std::sqrt(P));
}

/// Mutual information I(L; Y) in bits for L ~ N(mean, var) through the
/// logistic channel, as h_b(E[f(L)]) - E[h_b(f(L))] with both expectations
/// by Gauss-Hermite quadrature. Result clamped to [0, 1].
inline double mi_gaussian_logistic(const ScalarGaussian& g, int nodes = 64) {
  if (g.var < 0.0) throw std::invalid_argument("mi_gaussian_logistic: var must be >= 0");
  const double sigma = std::sqrt(g.var);
  const double mean_f =
      gauss_quadrature_expectation([](double l) { return logistic(l); }, g.mean, sigma, nodes);
  const double mean_hb = gauss_quadrature_expectation(
      [](double l) { return binary_entropy_of_logistic(l); }, g.mean, sigma, nodes);
  const double mi = binary_entropy(std::min(std::max(mean_f, 0.0), 1.0)) - mean_hb;
  return std::min(std::max(mi, 0.0), 1.0);
}

/// Squared 2-Wasserstein distance from a distribution with the given moments
/// to the two-point distribution B_t:
///   W2^2 = E[L^2] - 2 t E|L - med(L)| + t^2.
inline double w2sq_to_two_point(double second_moment, double abs_dev_from_median, double t) {
  if (t <= 0.0) throw std::invalid_argument("w2sq_to_two_point: t must be positive");
  if (second_moment < 0.0)
    throw std::invalid_argument("w2sq_to_two_point: E[L^2] must be >= 0");
  return second_moment - 2.0 * t * abs_dev_from_median + t * t;
}

/// Closed form of W2^2(N(mean, var), B_t); never smaller than (1-2/pi) t^2,
/// so no Gaussian input ever attains the two-point target exactly.
inline double w2sq_gaussian_to_two_point(const ScalarGaussian& g, double t) {
  if (t <= 0.0) throw std::invalid_argument("w2sq_gaussian_to_two_point: t must be positive");
  if (g.var < 0.0) throw std::invalid_argument("w2sq_gaussian_to_two_point: var must be >= 0");
  const double sigma = std::sqrt(g.var);
  const double c = std::sqrt(2.0 / M_PI);
  const double centered = sigma - c * t;
  return g.mean * g.mean + centered * centered + (1.0 - 2.0 / M_PI) * t * t;
}

/// Lipschitz constant K_P = K1 log2(f(sqrt P)/(1-f(sqrt P))) + K2 of the
/// information-continuity bound, with K1 = 0.25 and K2 = 0.32. The logistic
/// odds identity gives log2(f(s)/(1-f(s))) = s log2(e) exactly.
inline double info_continuity_constant(double P) {
  constexpr double kLog2E = 1.4426950408889634;
  return 0.25 * std::sqrt(P) * kLog2E + 0.32;
}

/// Result of a randomized check of C - I <= K_P * W2 over Gaussian inputs
/// within the power class E[L^2] <= P.
struct InfoContinuityReport {
  double P = 0.0;
  double K_P = 0.0;
  double capacity = 0.0;
  int trials = 0;
  int violations = 0;
  double max_slack = 0.0;  // max over trials of K_P*W2 - (C - I)
  double min_slack = 0.0;
};

/// Samples `trials` Gaussians with mean^2 + var <= P and checks each against
/// the information-continuity bound with slack tolerance 1e-9.
inline InfoContinuityReport verify_info_continuity(double P, int trials, RngStream& rng) {
  if (P <= 0.0) throw std::invalid_argument("verify_info_continuity: P must be positive");
  if (trials < 1) throw std::invalid_argument("verify_info_continuity: trials must be >= 1");

  InfoContinuityReport report;
  report.P = P;
  report.K_P = info_continuity_constant(P);
  report.capacity = capacity_logistic(P);
  report.trials = trials;
  report.max_slack = -std::numeric_limits<double>::infinity();
  report.min_slack = std::numeric_limits<double>::infinity();

  const double root_p = std::sqrt(P);
  for (int i = 0; i < trials; ++i) {
    const double mean = rng.uniform(-root_p, root_p);
    const double sigma = rng.uniform(0.0, std::sqrt(P - mean * mean));
    const ScalarGaussian g{mean, sigma * sigma};
    const double mi = mi_gaussian_logistic(g);
    const double w2 = std::sqrt(w2sq_gaussian_to_two_point(g, root_p));
    const double slack = report.K_P * w2 - (report.capacity - mi);
    if (slack < -1e-9) ++report.violations;
    report.max_slack = std::max(report.max_slack, slack);
    report.min_slack = std::min(report.min_slack, slack);
  }
  return report;
}

/// Finite distribution on a 1-D grid of points.
struct GridDistribution {
  std::vector<double> points;
  std::vector<double> weights;
};

namespace detail {

inline double mi_grid_logistic(const GridDistribution& p) {
  double mean_f = 0.0, mean_hb = 0.0;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    mean_f += p.weights[i] * logistic(p.points[i]);
    mean_hb += p.weights[i] * binary_entropy_of_logistic(p.points[i]);
  }
  return binary_entropy(std::min(std::max(mean_f, 0.0), 1.0)) - mean_hb;
}

}  // namespace detail

/// Returns the discrete logistic-channel mutual information of p and of its
/// symmetrization p~(l) = (p(l) + p(-l))/2. Symmetrizing never decreases the
/// information: the second component is at least the first up to 1e-12.
inline std::pair<double, double> mi_symmetrization_check(const GridDistribution& p) {
  if (p.points.size() != p.weights.size() || p.points.empty())
    throw std::invalid_argument("mi_symmetrization_check: malformed grid distribution");
  double total = 0.0;
  for (double w : p.weights) {
    if (w < 0.0) throw std::invalid_argument("mi_symmetrization_check: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("mi_symmetrization_check: weights must sum to 1");

  GridDistribution sym;
  sym.points.reserve(2 * p.points.size());
  sym.weights.reserve(2 * p.points.size());
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    sym.points.push_back(p.points[i]);
    sym.weights.push_back(0.5 * p.weights[i]);
    sym.points.push_back(-p.points[i]);
    sym.weights.push_back(0.5 * p.weights[i]);
  }
  return {detail::mi_grid_logistic(p), detail::mi_grid_logistic(sym)};
}

}  // namespace apm
