#pragma once

#include <cmath>
#include <utility>

#include "apm/logreg.hpp"
#include "apm/numkit.hpp"

namespace apm {

/// Gaussian approximation N(mu, sigma) of the hyperplane posterior, with the
/// per-example variational parameters it was fit with. sigma is positive
/// definite and every eigenvalue is at most 1/lambda (data only shrinks the
/// prior).
struct GaussianPosterior {
  Vec mu;
  Mat sigma;
  Vec xi;
};

namespace detail {

/// Variational curvature g(xi) = tanh(xi/2) / (4 xi), with limit 1/8 at 0.
inline double variational_curvature(double xi) {
  if (xi < 1e-8) return 0.125;
  return std::tanh(0.5 * xi) / (4.0 * xi);
}

}  // namespace detail

/// Coordinate-ascent variational approximation of the logistic posterior
/// under a N(0, I/lambda) prior. Each sweep recomputes
///   sigma^-1 = lambda I + 2 sum_i g(xi_i) x_i x_i^T,
///   mu       = sigma (1/2 sum_i y_i x_i),
///   xi_i     = sqrt(x_i^T (sigma + mu mu^T) x_i),
/// starting from xi = 1 and stopping when the largest relative xi change
/// drops below tol. An empty labeled set returns the prior.
inline GaussianPosterior variational_em(const LabeledSet& labeled, double lambda, int d,
                                        double tol = 1e-6, int max_iter = 500) {
  if (lambda <= 0.0) throw std::invalid_argument("variational_em: lambda must be positive");
  const int k = static_cast<int>(labeled.size());
  if (k == 0) return GaussianPosterior{Vec::Zero(d), Mat::Identity(d, d) / lambda, Vec()};

  Vec half_label_sum = Vec::Zero(d);
  for (const auto& ex : labeled) half_label_sum += 0.5 * ex.y * ex.x;

  Vec xi = Vec::Ones(k);
  Mat sigma;
  Vec mu;
  double rel_change = 0.0;
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    Mat prec = lambda * Mat::Identity(d, d);
    for (int i = 0; i < k; ++i)
      prec += 2.0 * detail::variational_curvature(xi[i]) * labeled[i].x * labeled[i].x.transpose();
    Eigen::LLT<Mat> llt(prec);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("variational_em: precision matrix lost positive definiteness");
    sigma = llt.solve(Mat::Identity(d, d));
    mu = llt.solve(half_label_sum);

    rel_change = 0.0;
    for (int i = 0; i < k; ++i) {
      const Vec& x = labeled[i].x;
      const double mx = mu.dot(x);
      const double q = x.dot(sigma * x) + mx * mx;
      const double next = std::sqrt(std::max(q, 0.0));
      rel_change = std::max(rel_change, std::abs(next - xi[i]) / std::max(xi[i], 1e-300));
      xi[i] = next;
    }
    if (rel_change < tol) return GaussianPosterior{std::move(mu), std::move(sigma), std::move(xi)};
  }
  throw ConvergenceError("variational_em: no convergence after max_iter sweeps", rel_change);
}

/// Mean and variance of the channel input L = theta^T x under the posterior.
inline std::pair<double, double> channel_input_distribution(const GaussianPosterior& post,
                                                            const Vec& x) {
  if (post.mu.size() != x.size())
    throw std::invalid_argument("channel_input_distribution: dimension mismatch");
  const double mean = post.mu.dot(x);
  const double var = std::max(0.0, x.dot(post.sigma * x));
  return {mean, var};
}

}  // namespace apm
