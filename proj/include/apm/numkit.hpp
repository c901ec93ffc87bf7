#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace apm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown by iterative routines that run out of iterations. Carries the
/// last iterate value (eigenvalue estimate, gradient norm, ...) so callers
/// can inspect how close the routine got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const { return last_value_; }

 private:
  double last_value_;
};

// --- scalar utilities --------------------------------------------------

/// log(1 + e^x) without overflow for large |x|.
inline double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Logistic function 1/(1+e^-x), stable over the full double range.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// --- deterministic RNG stream ------------------------------------------

/// Counter-based RNG (splitmix64). The raw 64-bit draw sequence for a given
/// seed is identical across platforms; a stream is single-owner and never
/// shared between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble(state_);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal draw (Box-Muller, second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vec(int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  static std::uint64_t scramble(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent stream seed from a parent seed and tags.
/// Used for hierarchical (master, trial, policy) seeding.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  return RngStream::scramble(parent + 0x9e3779b97f4a7c15ULL * (tag + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag1, std::uint64_t tag2) {
  return derive_seed(derive_seed(parent, tag1), tag2);
}

// --- symmetric-matrix routines ------------------------------------------

/// Symmetry within `rel_tol` relative to the largest entry magnitude.
inline bool is_symmetric(const Mat& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Largest-magnitude eigenvalue of a symmetric matrix by power iteration
/// with a deterministic all-ones start vector. Converged when the residual
/// ||Mv - lambda v|| drops below tol*|lambda|; a stall inside a dominant
/// eigenspace (multiplicity > 1) satisfies the same test, and the current
/// Rayleigh quotient is returned. `trace`, when given, collects the Rayleigh
/// quotient per iteration.
inline double dominant_eigenvalue(const Mat& m, double tol = 1e-8, int max_iter = 100000,
                                  std::vector<double>* trace = nullptr) {
  if (tol <= 0.0) throw std::invalid_argument("dominant_eigenvalue: tol must be positive");
  if (!is_symmetric(m)) throw std::invalid_argument("dominant_eigenvalue: matrix is not symmetric");
  const auto d = m.rows();
  Vec v = Vec::Ones(d) / std::sqrt(static_cast<double>(d));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vec w = m * v;
    lambda = v.dot(w);
    if (trace) trace->push_back(lambda);
    const double resid = (w - lambda * v).norm();
    if (resid <= tol * std::max(std::abs(lambda), 1e-300)) return lambda;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // v lies in the null space and M v = 0 exactly
    v = w / wn;
  }
  throw ConvergenceError("dominant_eigenvalue: no convergence after max_iter", lambda);
}

namespace detail {

struct GaussHermiteRule {
  std::vector<double> nodes;    // roots of the physicists' Hermite polynomial
  std::vector<double> weights;  // normalized so the weights sum to 1
};

/// Golub-Welsch on the Jacobi matrix of the Hermite recurrence.
inline GaussHermiteRule compute_gauss_hermite(int n) {
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;  // total mass sqrt(pi) cancels in the normalized rule
  }
  return rule;
}

inline const GaussHermiteRule& gauss_hermite_rule(int n) {
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

}  // namespace detail

/// E[g(L)] for L ~ Normal(mu, sigma^2) by Gauss-Hermite quadrature.
/// sigma = 0 returns g(mu) exactly.
template <class F>
double gauss_quadrature_expectation(F&& g, double mu, double sigma, int nodes = 64) {
  if (sigma < 0.0) throw std::invalid_argument("gauss_quadrature_expectation: sigma must be >= 0");
  if (nodes < 16) throw std::invalid_argument("gauss_quadrature_expectation: need at least 16 nodes");
  if (sigma == 0.0) return g(mu);
  const auto& rule = detail::gauss_hermite_rule(nodes);
  const double scale = std::sqrt(2.0) * sigma;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = mu + scale * rule.nodes[i];
    const double gx = g(x);
    if (!std::isfinite(gx)) {
      throw std::runtime_error("gauss_quadrature_expectation: non-finite integrand at node " +
                               std::to_string(i) + " (x = " + std::to_string(x) + ")");
    }
    acc += rule.weights[i] * gx;
  }
  return acc;
}

/// Solves A x = b for symmetric positive-definite A (Cholesky plus one step
/// of iterative refinement).
inline Vec cholesky_solve(const Mat& a, const Vec& b) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("cholesky_solve: not positive definite");
  Vec x = llt.solve(b);
  x += llt.solve(b - a * x);
  return x;
}

}  // namespace apm
