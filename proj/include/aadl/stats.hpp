#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "aadl/model.hpp"

namespace aadl {

/// Sample Pearson correlation. Throws on length mismatch and on constant
/// inputs, for which the correlation is undefined.
template <typename A, typename B>
double pearson_r(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  require(a.size() == b.size(), ErrorKind::DimensionMismatch,
          "pearson_r: lengths " + std::to_string(a.size()) + " and " +
              std::to_string(b.size()) + " differ");
  require(a.size() >= 2, ErrorKind::InvalidArgument,
          "pearson_r needs at least two samples");
  const Vector ac = a.reshaped().array() - a.mean();
  const Vector bc = b.reshaped().array() - b.mean();
  const double saa = ac.squaredNorm();
  const double sbb = bc.squaredNorm();
  require(saa > 0.0 && sbb > 0.0, ErrorKind::InvalidArgument,
          "pearson_r: correlation undefined for a constant vector");
  const double r = ac.dot(bc) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace aadl
