#pragma once

// Step I of the alternating minimization: with D fixed, S is refined by
// repeatedly minimizing a separable quadratic majorizer of the objective,
// whose minimizer is an elementwise soft threshold of
//   A = (1/c_S) (D^T X + (c_S I - D^T D) S_prev).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "aadl/model.hpp"

namespace aadl {

enum class ThresholdMode {
  PaperLiteral,  // theta = lambda / 2
  ExactProx,     // theta = lambda / (2 c_S), exact minimizer of the surrogate
};

inline const char* to_string(ThresholdMode m) {
  return m == ThresholdMode::ExactProx ? "exact_prox" : "paper_literal";
}

inline ThresholdMode threshold_mode_from_string(const std::string& s) {
  if (s == "paper_literal") return ThresholdMode::PaperLiteral;
  if (s == "exact_prox") return ThresholdMode::ExactProx;
  throw Error(ErrorKind::InvalidArgument,
              "unknown threshold mode '" + s + "' (expected paper_literal or exact_prox)");
}

struct CoefStepConfig {
  double lambda = 0.1;
  int n_inner = 100;
  double c_s_safety = 1.01;
  ThresholdMode threshold_mode = ThresholdMode::PaperLiteral;

  void validate() const {
    require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::InvalidArgument,
            "lambda must be > 0");
    require(n_inner >= 1, ErrorKind::InvalidArgument, "n_inner must be >= 1");
    require(c_s_safety > 1.0, ErrorKind::InvalidArgument,
            "c_s_safety must be > 1");
  }

  double threshold(double c_s) const noexcept {
    return threshold_mode == ThresholdMode::ExactProx ? lambda / (2.0 * c_s)
                                                      : lambda / 2.0;
  }
};

struct SpectralEstimate {
  double value = 0.0;
  bool converged = false;  // false: value is the Frobenius upper bound
  int iterations = 0;
};

/// Largest eigenvalue of a symmetric positive semidefinite Gram matrix by
/// power iteration. The Rayleigh quotient never exceeds the true value; when
/// the residual test ||G v - rho v|| <= rel_tol * rho is not met within
/// max_iter, `upper_bound` is returned instead.
inline SpectralEstimate gram_top_eigenvalue(const Matrix& gram,
                                            double upper_bound,
                                            double rel_tol = 1e-6,
                                            int max_iter = 1000) {
  const Index k = gram.rows();
  // Fixed-seed start vector: generic direction, reproducible across runs.
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Vector v(k);
  for (Index i = 0; i < k; ++i) v(i) = 1.0 + 0.25 * normal(rng);
  v.normalize();

  SpectralEstimate est;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = gram * v;
    const double rho = v.dot(w);
    est.iterations = it;
    if (!(rho > 0.0)) break;
    if ((w - rho * v).norm() <= rel_tol * rho) {
      est.value = rho;
      est.converged = true;
      return est;
    }
    v = w / w.norm();
  }
  est.value = upper_bound;
  return est;
}

/// Estimate of ||A^T A||_2 = sigma_max(A)^2 for any matrix A.
inline SpectralEstimate spectral_norm_sq(const Matrix& a) {
  const double fro2 = a.squaredNorm();
  require(fro2 > 0.0, ErrorKind::NumericalFailure,
          "spectral norm of an all-zero matrix is undefined for step sizing");
  // Use the smaller of the two Gram matrices; both share the top eigenvalue.
  if (a.cols() <= a.rows()) {
    const Matrix g = a.transpose() * a;
    return gram_top_eigenvalue(g, fro2);
  }
  const Matrix g = a * a.transpose();
  return gram_top_eigenvalue(g, fro2);
}

inline SpectralEstimate spectral_norm_sq(const Dictionary& d) {
  return spectral_norm_sq(d.atoms());
}

/// A = (1/c_S) (D^T X + (c_S I - D^T D) S_prev)
inline Matrix compute_a(const Dictionary& d, const DataMatrix& x,
                        const CoefficientMatrix& s_prev, double c_s) {
  detail::check_conformance(x, d.atoms(), s_prev.values());
  require(c_s > 0.0, ErrorKind::InvalidArgument, "c_S must be > 0");
  const Matrix& dm = d.atoms();
  const Matrix& s = s_prev.values();
  const Matrix gram = dm.transpose() * dm;
  Matrix a = dm.transpose() * x.values();
  a.noalias() += c_s * s;
  a.noalias() -= gram * s;
  return a / c_s;
}

inline double soft_threshold(double a, double theta) noexcept {
  if (a > theta) return a - theta;
  if (a < -theta) return a + theta;
  return 0.0;
}

/// Elementwise soft threshold; entries with |a| <= theta become exactly 0.
template <typename Derived>
Matrix shrink_values(const Eigen::MatrixBase<Derived>& a, double theta) {
  return a.unaryExpr([theta](double v) { return soft_threshold(v, theta); });
}

inline CoefficientMatrix shrink(const Matrix& a, double threshold) {
  require(threshold >= 0.0, ErrorKind::InvalidArgument,
          "shrink threshold must be >= 0");
  return CoefficientMatrix(shrink_values(a, threshold));
}

struct NoObserver {
  void operator()(int, const Matrix&) const noexcept {}
};

/// Runs n_inner majorize-minimize steps on S with D held fixed. `observe` is
/// called as observe(n, S^[n]) after every step.
template <typename Observer = NoObserver>
CoefficientMatrix run_coefficient_update(const DataMatrix& x,
                                         const Dictionary& d,
                                         const CoefficientMatrix& s_init,
                                         const CoefStepConfig& cfg,
                                         Observer&& observe = {}) {
  cfg.validate();
  detail::check_conformance(x, d.atoms(), s_init.values());

  const Matrix& dm = d.atoms();
  const double c_s = cfg.c_s_safety * spectral_norm_sq(dm).value;
  const double theta = cfg.threshold(c_s);

  // Hoisted out of the loop: A = S + (D^T X - D^T D S) / c_S.
  const Matrix dtx = dm.transpose() * x.values();
  const Matrix gram = dm.transpose() * dm;

  Matrix s = s_init.values();
  Matrix a(s.rows(), s.cols());
  for (int n = 1; n <= cfg.n_inner; ++n) {
    a = dtx;
    a.noalias() += c_s * s;
    a.noalias() -= gram * s;
    a /= c_s;
    s = shrink_values(a, theta);
    observe(n, s);
  }
  return CoefficientMatrix(std::move(s));
}

}  // namespace aadl
