#pragma once

// Source-recovery scoring: correlation between an estimated source and the
// ground truth, reported as 1 - R^2, and aggregation over repeated runs.

#include <cmath>
#include <string>
#include <vector>

#include "aadl/model.hpp"
#include "aadl/simgen.hpp"
#include "aadl/solver.hpp"
#include "aadl/stats.hpp"

namespace aadl::eval {

struct RecoveryScore {
  Index matched_atom_index = 0;  // zero-based column of D / row of S
  double r = 0.0;
  double one_minus_r_squared = 1.0;
  bool degenerate = false;  // estimated source was constant (e.g. all zero)
};

enum class SourceView {
  SpatialMap,  // row of S against row of S_true
  TimeCourse,  // column of D against column of D_true
};

namespace detail {

inline bool is_constant(const Vector& v) {
  return v.size() < 2 || (v.array() == v(0)).all();
}

inline RecoveryScore make_score(Index atom, double r, bool degenerate) {
  RecoveryScore s;
  s.matched_atom_index = atom;
  s.r = r;
  s.one_minus_r_squared = 1.0 - r * r;
  s.degenerate = degenerate;
  return s;
}

}  // namespace detail

/// Scores estimated source `atom` (or, for blind fits, the best-matching
/// atom by |r|) against truth source `target`.
inline RecoveryScore score_recovery(const FitResult& fit,
                                    const sim::SyntheticDataset& truth,
                                    Index target,
                                    SourceView view = SourceView::SpatialMap) {
  const Matrix& s_est = fit.coefficients.values();
  const Matrix& d_est = fit.dictionary.atoms();
  require(s_est.cols() == truth.s_true.cols(), ErrorKind::DimensionMismatch,
          "fit has N=" + std::to_string(s_est.cols()) + " voxels, truth has N=" +
              std::to_string(truth.s_true.cols()));
  require(target >= 0 && target < truth.s_true.rows(), ErrorKind::InvalidArgument,
          "target source index out of range");

  auto estimate = [&](Index k) -> Vector {
    if (view == SourceView::SpatialMap) return s_est.row(k).transpose();
    return d_est.col(k);
  };
  const Vector reference = view == SourceView::SpatialMap
                               ? Vector(truth.s_true.row(target).transpose())
                               : Vector(truth.d_true.col(target));

  const bool assisted = fit.config.constraints.mode != Mode::Blind &&
                        fit.dictionary.anchored_count() > 0;
  if (assisted) {
    const Vector est = estimate(0);
    if (detail::is_constant(est)) return detail::make_score(0, 0.0, true);
    return detail::make_score(0, pearson_r(est, reference), false);
  }

  RecoveryScore best = detail::make_score(0, 0.0, true);
  for (Index k = 0; k < s_est.rows(); ++k) {
    const Vector est = estimate(k);
    if (detail::is_constant(est)) continue;
    const double r = pearson_r(est, reference);
    if (best.degenerate || std::abs(r) > std::abs(best.r))
      best = detail::make_score(k, r, false);
  }
  return best;
}

struct EnsembleStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single score
  std::size_t count = 0;
};

inline EnsembleStats ensemble(const std::vector<RecoveryScore>& scores) {
  require(!scores.empty(), ErrorKind::InvalidArgument, "ensemble of zero scores");
  EnsembleStats st;
  st.count = scores.size();
  // Deviations from the first score keep identical inputs exact.
  const double ref = scores.front().one_minus_r_squared;
  double shift = 0.0;
  for (const auto& s : scores) shift += s.one_minus_r_squared - ref;
  shift /= static_cast<double>(st.count);
  st.mean = ref + shift;
  if (st.count > 1) {
    double ss = 0.0;
    for (const auto& s : scores) {
      const double d = (s.one_minus_r_squared - ref) - shift;
      ss += d * d;
    }
    st.stddev = std::sqrt(ss / static_cast<double>(st.count - 1));
  }
  return st;
}

/// sqrt((s_a^2 + s_b^2) / 2), the spread used when comparing two curves.
inline double pooled_std(const EnsembleStats& a, const EnsembleStats& b) {
  return std::sqrt(0.5 * (a.stddev * a.stddev + b.stddev * b.stddev));
}

}  // namespace aadl::eval
