#pragma once

// Step II of the alternating minimization: with S fixed, D is refined by
// minimizing a quadratic majorizer whose unconstrained minimizer is
//   B = (1/c_D) (X S^T + R (c_D I - S S^T)),   R = previous iterate,
// followed by column-wise Euclidean projection onto the admissible set:
// a ball of squared radius c_delta around each anchor for the first M
// columns, a ball of squared radius c_d around the origin for the rest.

#include <cmath>
#include <string>

#include "aadl/coefficient_update.hpp"
#include "aadl/model.hpp"

namespace aadl {

struct DictStepConfig {
  int n_inner = 100;
  double c_d_safety = 1.01;

  void validate() const {
    require(n_inner >= 1, ErrorKind::InvalidArgument, "n_inner must be >= 1");
    require(c_d_safety > 1.0, ErrorKind::InvalidArgument,
            "c_d_safety must be > 1");
  }
};

namespace detail {

// Scales `offset` by sqrt(radius_sq)/||offset|| and adds `center`. The scale
// is nudged down one ulp at a time until the recomputed squared distance is
// within the bound, so the result is admissible as evaluated in floating
// point and re-projecting it is the identity.
template <typename Center>
Vector scale_onto_sphere(const Center& center, const Vector& offset,
                         double dist_sq, double radius_sq) {
  double scale = std::sqrt(radius_sq) / std::sqrt(dist_sq);
  Vector out = center + scale * offset;
  for (int guard = 0; guard < 256; ++guard) {
    if ((out - center).squaredNorm() <= radius_sq) return out;
    scale = std::nextafter(scale, 0.0);
    out = center + scale * offset;
  }
  return center;
}

}  // namespace detail

/// Nearest point to b in { v : ||v - delta||^2 <= c_delta }.
inline Vector project_anchored(const Vector& b, const Vector& delta,
                               double c_delta) {
  require(b.size() == delta.size(), ErrorKind::DimensionMismatch,
          "project_anchored: atom length " + std::to_string(b.size()) +
              " vs anchor length " + std::to_string(delta.size()));
  require(c_delta >= 0.0, ErrorKind::InvalidArgument, "c_delta must be >= 0");
  const Vector offset = b - delta;
  const double dist_sq = offset.squaredNorm();
  if (dist_sq <= c_delta) return b;
  if (c_delta == 0.0) return delta;
  return detail::scale_onto_sphere(delta, offset, dist_sq, c_delta);
}

/// Nearest point to b in { v : ||v||^2 <= c_d }.
inline Vector project_free(const Vector& b, double c_d) {
  require(c_d > 0.0, ErrorKind::InvalidArgument, "c_d must be > 0");
  const double norm_sq = b.squaredNorm();
  if (norm_sq <= c_d) return b;
  return detail::scale_onto_sphere(Vector::Zero(b.size()), b, norm_sq, c_d);
}

/// Projects every column of `atoms` onto its admissible ball in place.
inline void project_columns(Matrix& atoms, const AnchorSet& anchors,
                            const ConstraintSpec& c) {
  const Index m = anchors.count();
  const double r_anchor = c.anchored_radius_sq();
  for (Index i = 0; i < atoms.cols(); ++i) {
    if (i < m)
      atoms.col(i) = project_anchored(atoms.col(i), anchors.deltas().col(i), r_anchor);
    else
      atoms.col(i) = project_free(atoms.col(i), c.c_d);
  }
}

/// B = (1/c_D) (X S^T + R (c_D I - S S^T))
inline Matrix compute_b(const DataMatrix& x, const CoefficientMatrix& s,
                        const Matrix& r, double c_d_const) {
  detail::check_conformance(x, r, s.values());
  require(c_d_const > 0.0, ErrorKind::InvalidArgument, "c_D must be > 0");
  const Matrix& sm = s.values();
  const Matrix sst = sm * sm.transpose();
  Matrix b = x.values() * sm.transpose();
  b.noalias() += c_d_const * r;
  b.noalias() -= r * sst;
  return b / c_d_const;
}

/// Curvature constant for Step II: c_d_safety * ||S S^T||_2, or 1 when S = 0
/// (the data term then vanishes and any positive constant majorizes it).
inline double dictionary_step_constant(const CoefficientMatrix& s,
                                       double c_d_safety) {
  if (s.values().squaredNorm() == 0.0) return 1.0;
  return c_d_safety * spectral_norm_sq(s.values()).value;
}

/// Smooth part of the Step II surrogate:
///   ||X - D S||^2 + c_D ||D - R||^2 - ||(D - R) S||^2
inline double surrogate_value(const Matrix& d, const DataMatrix& x,
                              const CoefficientMatrix& s, const Matrix& r,
                              double c_d_const) {
  detail::check_conformance(x, d, s.values());
  const Matrix& sm = s.values();
  return (x.values() - d * sm).squaredNorm() + c_d_const * (d - r).squaredNorm() -
         ((d - r) * sm).squaredNorm();
}

/// Gradient of `surrogate_value` in D: -2 X S^T + 2 c_D (D - R) + 2 R S S^T.
/// Vanishes exactly at D = B.
inline Matrix surrogate_gradient(const Matrix& d, const DataMatrix& x,
                                 const CoefficientMatrix& s, const Matrix& r,
                                 double c_d_const) {
  detail::check_conformance(x, d, s.values());
  require(r.rows() == d.rows() && r.cols() == d.cols(),
          ErrorKind::DimensionMismatch, "surrogate_gradient: R and D shapes differ");
  const Matrix& sm = s.values();
  Matrix g = -2.0 * (x.values() * sm.transpose());
  g.noalias() += 2.0 * c_d_const * (d - r);
  g.noalias() += 2.0 * (r * (sm * sm.transpose()));
  return g;
}

/// Runs n_inner majorize-project steps on D with S held fixed. The observer
/// sees every projected iterate as observe(n, D^[n]).
template <typename Observer = NoObserver>
Dictionary run_dictionary_update(const DataMatrix& x,
                                 const CoefficientMatrix& s,
                                 const Dictionary& d_init,
                                 const DictStepConfig& cfg,
                                 Observer&& observe = {}) {
  cfg.validate();
  detail::check_conformance(x, d_init.atoms(), s.values());

  const Matrix& sm = s.values();
  const double c_d = dictionary_step_constant(s, cfg.c_d_safety);
  const Matrix xst = x.values() * sm.transpose();
  const Matrix sst = sm * sm.transpose();

  Matrix r = d_init.atoms();
  Matrix b(r.rows(), r.cols());
  for (int n = 1; n <= cfg.n_inner; ++n) {
    b = xst;
    b.noalias() += c_d * r;
    b.noalias() -= r * sst;
    b /= c_d;
    project_columns(b, d_init.anchors(), d_init.constraints());
    r.swap(b);
    observe(n, static_cast<const Matrix&>(r));
  }
  return d_init.with_atoms(std::move(r));
}

}  // namespace aadl
