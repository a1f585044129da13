#pragma once

// Core value types shared by every stage of the factorization X ~ D S:
// the data matrix, the anchored/free dictionary, the sparse coefficient
// maps, and the objective / admissibility checks over them.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aadl/error.hpp"

namespace aadl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kFeasibilityTol = 1e-12;

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j)))
        throw Error(ErrorKind::NumericalFailure,
                    std::string(what) + ": non-finite entry at (" +
                        std::to_string(i) + ", " + std::to_string(j) + ")");
}

}  // namespace detail

/// Observation matrix, T time points (rows) by N voxels (columns).
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values) : values_(std::move(values)) {
    require(values_.rows() >= 2, ErrorKind::InvalidArgument,
            "data matrix needs T >= 2 time points, got " +
                std::to_string(values_.rows()));
    require(values_.cols() >= 2, ErrorKind::InvalidArgument,
            "data matrix needs N >= 2 voxels, got " +
                std::to_string(values_.cols()));
    detail::require_finite(values_, "data matrix");
  }

  const Matrix& values() const noexcept { return values_; }
  Index time_points() const noexcept { return values_.rows(); }
  Index voxels() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
};

/// The a-priori task time courses; column i anchors dictionary atom i.
/// Zero columns is the fully blind configuration.
class AnchorSet {
 public:
  AnchorSet() = default;
  explicit AnchorSet(Matrix deltas) : deltas_(std::move(deltas)) {
    detail::require_finite(deltas_, "anchor set");
  }

  static AnchorSet none(Index time_points) {
    return AnchorSet(Matrix(time_points, 0));
  }

  const Matrix& deltas() const noexcept { return deltas_; }
  Index count() const noexcept { return deltas_.cols(); }
  Index time_points() const noexcept { return deltas_.rows(); }
  bool empty() const noexcept { return deltas_.cols() == 0; }

 private:
  Matrix deltas_;
};

enum class Mode { AtomAssisted, SdlFixed, Blind };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::AtomAssisted: return "atom_assisted";
    case Mode::SdlFixed: return "sdl";
    case Mode::Blind: return "blind";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "atom_assisted") return Mode::AtomAssisted;
  if (s == "sdl") return Mode::SdlFixed;
  if (s == "blind") return Mode::Blind;
  throw Error(ErrorKind::InvalidArgument,
              "unknown method '" + s + "' (expected atom_assisted, sdl or blind)");
}

struct ConstraintSpec {
  double c_delta = 0.2;  // squared radius around each anchor
  double c_d = 1.0;      // squared norm bound for free atoms
  Mode mode = Mode::AtomAssisted;

  // SDL keeps anchored atoms fixed: a zero-radius ball.
  double anchored_radius_sq() const noexcept {
    return mode == Mode::SdlFixed ? 0.0 : c_delta;
  }

  void validate() const {
    // +inf is accepted and means "unconstrained".
    require(c_delta >= 0.0, ErrorKind::InvalidArgument, "c_delta must be >= 0");
    require(c_d > 0.0, ErrorKind::InvalidArgument, "c_d must be > 0");
  }
};

/// T x K dictionary whose first M columns are anchored to `anchors`.
class Dictionary {
 public:
  Dictionary(Matrix atoms, AnchorSet anchors, ConstraintSpec constraints)
      : atoms_(std::move(atoms)),
        anchors_(std::move(anchors)),
        constraints_(constraints) {
    constraints_.validate();
    require(atoms_.cols() >= 1, ErrorKind::InvalidArgument,
            "dictionary needs at least one atom");
    require(anchors_.count() <= atoms_.cols(), ErrorKind::InvalidArgument,
            "anchor count M=" + std::to_string(anchors_.count()) +
                " exceeds atom count K=" + std::to_string(atoms_.cols()));
    require(anchors_.empty() || anchors_.time_points() == atoms_.rows(),
            ErrorKind::DimensionMismatch,
            "anchor length T=" + std::to_string(anchors_.time_points()) +
                " does not match dictionary rows T=" +
                std::to_string(atoms_.rows()));
    require(constraints_.mode != Mode::Blind || anchors_.empty(),
            ErrorKind::InvalidArgument, "blind mode requires M = 0 anchors");
    detail::require_finite(atoms_, "dictionary");
  }

  const Matrix& atoms() const noexcept { return atoms_; }
  const AnchorSet& anchors() const noexcept { return anchors_; }
  const ConstraintSpec& constraints() const noexcept { return constraints_; }
  Index time_points() const noexcept { return atoms_.rows(); }
  Index atom_count() const noexcept { return atoms_.cols(); }
  Index anchored_count() const noexcept { return anchors_.count(); }

  Dictionary with_atoms(Matrix atoms) const {
    return Dictionary(std::move(atoms), anchors_, constraints_);
  }

 private:
  Matrix atoms_;
  AnchorSet anchors_;
  ConstraintSpec constraints_;
};

/// K x N spatial maps. Sparsity is a property of the values.
class CoefficientMatrix {
 public:
  explicit CoefficientMatrix(Matrix values) : values_(std::move(values)) {
    detail::require_finite(values_, "coefficient matrix");
  }

  static CoefficientMatrix zeros(Index k, Index n) {
    return CoefficientMatrix(Matrix::Zero(k, n));
  }

  const Matrix& values() const noexcept { return values_; }
  Index atoms() const noexcept { return values_.rows(); }
  Index voxels() const noexcept { return values_.cols(); }

  double zero_fraction() const {
    if (values_.size() == 0) return 0.0;
    return static_cast<double>((values_.array() == 0.0).count()) /
           static_cast<double>(values_.size());
  }

 private:
  Matrix values_;
};

namespace detail {

inline void check_conformance(const DataMatrix& x, const Matrix& d,
                              const Matrix& s) {
  require(d.rows() == x.time_points(), ErrorKind::DimensionMismatch,
          "T mismatch: data has " + std::to_string(x.time_points()) +
              " rows, dictionary has " + std::to_string(d.rows()));
  require(s.rows() == d.cols(), ErrorKind::DimensionMismatch,
          "K mismatch: dictionary has " + std::to_string(d.cols()) +
              " atoms, coefficients have " + std::to_string(s.rows()) + " rows");
  require(s.cols() == x.voxels(), ErrorKind::DimensionMismatch,
          "N mismatch: data has " + std::to_string(x.voxels()) +
              " columns, coefficients have " + std::to_string(s.cols()));
}

}  // namespace detail

/// ||X - D S||_F
inline double residual_fro(const DataMatrix& x, const Dictionary& d,
                           const CoefficientMatrix& s) {
  detail::check_conformance(x, d.atoms(), s.values());
  return (x.values() - d.atoms() * s.values()).norm();
}

/// ||X - D S||_F^2 + lambda * sum |s_ij|. Constraints are not penalized here;
/// they are enforced through feasibility of D.
inline double objective(const DataMatrix& x, const Dictionary& d,
                        const CoefficientMatrix& s, double lambda) {
  detail::check_conformance(x, d.atoms(), s.values());
  require(lambda >= 0.0, ErrorKind::InvalidArgument, "lambda must be >= 0");
  const double r = (x.values() - d.atoms() * s.values()).squaredNorm();
  return r + lambda * s.values().cwiseAbs().sum();
}

struct AtomViolation {
  Index atom;     // zero-based column index
  double excess;  // squared distance (or norm) above the bound
};

struct FeasibilityReport {
  bool feasible = true;
  double max_excess = 0.0;  // max(0, dist^2 - bound) over all atoms
  std::vector<AtomViolation> violations;

  explicit operator bool() const noexcept { return feasible; }
};

/// Squared distance above the admissible bound for a single atom (0 if inside).
inline double atom_excess(const Dictionary& d, Index i) {
  const auto& c = d.constraints();
  if (i < d.anchored_count()) {
    const double dist =
        (d.atoms().col(i) - d.anchors().deltas().col(i)).squaredNorm();
    return std::max(0.0, dist - c.anchored_radius_sq());
  }
  return std::max(0.0, d.atoms().col(i).squaredNorm() - c.c_d);
}

inline FeasibilityReport is_feasible(const Dictionary& d,
                                     double tol = kFeasibilityTol) {
  FeasibilityReport rep;
  for (Index i = 0; i < d.atom_count(); ++i) {
    const double e = atom_excess(d, i);
    rep.max_excess = std::max(rep.max_excess, e);
    if (e > tol) {
      rep.feasible = false;
      rep.violations.push_back({i, e});
    }
  }
  return rep;
}

}  // namespace aadl
