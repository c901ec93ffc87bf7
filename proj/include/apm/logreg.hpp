#pragma once

#include <cmath>
#include <vector>

#include "apm/data.hpp"
#include "apm/numkit.hpp"

namespace apm {

/// Ordered sequence of labeled examples.
struct LabeledExample {
  Vec x;
  int y;  // -1 or +1
};

using LabeledSet = std::vector<LabeledExample>;

/// MAP estimate of homogeneous logistic-regression weights under a
/// N(0, I/lambda) prior.
struct MapModel {
  Vec theta;
  double lambda = 0.0;
  double grad_norm = 0.0;
};

/// P(Y=1 | x, theta), numerically stable for any finite inner product.
inline double predict_proba(const Vec& theta, const Vec& x) {
  if (theta.size() != x.size()) throw std::invalid_argument("predict_proba: dimension mismatch");
  return logistic(x.dot(theta));
}

namespace detail {

inline double map_objective(const LabeledSet& labeled, double lambda, const Vec& theta) {
  double obj = 0.5 * lambda * theta.squaredNorm();
  for (const auto& ex : labeled) obj += log1pexp(-ex.y * ex.x.dot(theta));
  return obj;
}

inline Vec map_gradient(const LabeledSet& labeled, double lambda, const Vec& theta) {
  Vec g = lambda * theta;
  for (const auto& ex : labeled) g -= ex.y * logistic(-ex.y * ex.x.dot(theta)) * ex.x;
  return g;
}

}  // namespace detail

/// Minimizes the regularized negative log-posterior by Newton's method with
/// Armijo backtracking (factor 0.5, c = 1e-4), starting at theta = 0 and
/// stopping when the gradient 2-norm is at most 1e-6. An empty labeled set
/// returns theta = 0. `objective_trace`, when given, collects the objective
/// value after each Newton step.
inline MapModel fit_map(const LabeledSet& labeled, double lambda, int d,
                        std::vector<double>* objective_trace = nullptr) {
  if (lambda <= 0.0) throw std::invalid_argument("fit_map: lambda must be positive");
  constexpr double kGradTol = 1e-6;
  constexpr int kMaxIter = 100;
  constexpr double kArmijoC = 1e-4;

  Vec theta = Vec::Zero(d);
  if (labeled.empty()) return MapModel{theta, lambda, 0.0};

  double obj = detail::map_objective(labeled, lambda, theta);
  if (objective_trace) objective_trace->push_back(obj);
  for (int it = 0; it < kMaxIter; ++it) {
    const Vec g = detail::map_gradient(labeled, lambda, theta);
    const double gn = g.norm();
    if (gn <= kGradTol) return MapModel{theta, lambda, gn};

    Mat hess = lambda * Mat::Identity(d, d);
    for (const auto& ex : labeled) {
      const double p = logistic(ex.x.dot(theta));
      hess += p * (1.0 - p) * ex.x * ex.x.transpose();
    }
    const Vec step = cholesky_solve(hess, g);
    const double slope = g.dot(step);

    double t = 1.0;
    Vec cand;
    double cand_obj;
    for (;;) {
      cand = theta - t * step;
      cand_obj = detail::map_objective(labeled, lambda, cand);
      if (cand_obj <= obj - kArmijoC * t * slope || t < 1e-12) break;
      t *= 0.5;
    }
    theta = cand;
    obj = cand_obj;
    if (objective_trace) objective_trace->push_back(obj);
  }
  const double gn = detail::map_gradient(labeled, lambda, theta).norm();
  if (gn <= kGradTol) return MapModel{theta, lambda, gn};
  throw ConvergenceError("fit_map: Newton did not converge", gn);
}

/// Fraction of examples with sign(x^T theta) == y; sign(0) counts as +1.
inline double accuracy(const Vec& theta, const Dataset& ds) {
  if (theta.size() != ds.d()) throw std::invalid_argument("accuracy: dimension mismatch");
  int correct = 0;
  for (int i = 0; i < ds.n(); ++i) {
    const double margin = ds.X.row(i).dot(theta);
    const int pred = margin >= 0.0 ? 1 : -1;
    if (pred == ds.y[i]) ++correct;
  }
  return static_cast<double>(correct) / ds.n();
}

}  // namespace apm
