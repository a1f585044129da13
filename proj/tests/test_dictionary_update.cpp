#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aadl/dictionary_update.hpp"
#include "oracles.hpp"

using namespace aadl;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

Matrix feasible_atoms(const Matrix& delta, Index k, const ConstraintSpec& c, std::mt19937_64& rng) {
  Matrix atoms = oracle::random_matrix(delta.rows(), k, rng);
  project_columns(atoms, AnchorSet(delta), c);
  return atoms;
}

}  // namespace

TEST(ProjectAnchored, InsidePointIsUnchanged) {
  const Vector d = vec3(1, 2, 3);
  EXPECT_EQ(project_anchored(d, d, 0.2), d);
}

TEST(ProjectAnchored, HalvesOffsetAtFourTimesRadius) {
  const Vector delta = vec3(0.5, -1.0, 2.0);
  const Vector offset = vec3(0.0, 0.0, std::sqrt(0.8));  // |offset|^2 = 4 * 0.2
  const Vector p = project_anchored(delta + offset, delta, 0.2);
  EXPECT_TRUE(p.isApprox(delta + 0.5 * offset, 1e-14));
  EXPECT_NEAR((p - delta).squaredNorm(), 0.2, 1e-15);
  EXPECT_LE((p - delta).squaredNorm(), 0.2);
}

TEST(ProjectAnchored, ZeroRadiusReturnsAnchorExactly) {
  const Vector delta = vec3(0.1, 0.2, 0.3);
  EXPECT_EQ(project_anchored(vec3(5, 6, 7), delta, 0.0), delta);
}

TEST(ProjectFree, KnownValues) {
  EXPECT_EQ(project_free(Vector::Zero(3), 1.0), Vector::Zero(3));
  const Vector b = vec3(0.6, 0.8, 0.0);
  EXPECT_EQ(project_free(b, b.squaredNorm()), b);
  const Vector p = project_free(vec3(3, 4, 0), 1.0);
  EXPECT_TRUE(p.isApprox(vec3(0.6, 0.8, 0.0), 1e-15));
  EXPECT_LE(p.squaredNorm(), 1.0);
}

TEST(Projection, IsMetricAgainstRandomFeasiblePoints) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector b = oracle::random_matrix(5, 1, rng, 2.0).col(0);
    const Vector delta = oracle::random_matrix(5, 1, rng).col(0);
    const double c = 0.05 + u(rng);
    const Vector p = project_anchored(b, delta, c);
    const Vector q = project_free(b, c);
    for (int k = 0; k < 20; ++k) {
      Vector dir = oracle::random_matrix(5, 1, rng).col(0);
      dir *= std::sqrt(c) * u(rng) / dir.norm();
      EXPECT_LE((b - p).norm(), (b - (delta + dir)).norm() + 1e-12);
      EXPECT_LE((b - q).norm(), (b - dir).norm() + 1e-12);
    }
  }
}

TEST(Projection, IdempotentBitwise) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector b = oracle::random_matrix(7, 1, rng, 3.0).col(0);
    const Vector delta = oracle::random_matrix(7, 1, rng).col(0);
    const double c = 0.2 * (1 + trial % 5);
    const Vector p = project_anchored(b, delta, c);
    EXPECT_EQ(project_anchored(p, delta, c), p);
    EXPECT_LE((p - delta).squaredNorm(), c);
    const Vector q = project_free(b, c);
    EXPECT_EQ(project_free(q, c), q);
    EXPECT_LE(q.squaredNorm(), c);
  }
}

TEST(ComputeB, ZeroCoefficientsReturnCurrentIterate) {
  std::mt19937_64 rng(33);
  const Matrix r = oracle::random_matrix(5, 3, rng);
  const Matrix x = oracle::random_matrix(5, 4, rng);
  EXPECT_TRUE(compute_b(DataMatrix(x), CoefficientMatrix::zeros(3, 4), r, 1.7).isApprox(r, 1e-15));
}

TEST(ComputeB, OrthonormalRowsSimplify) {
  std::mt19937_64 rng(34);
  Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(6, 2, rng));
  const Matrix s = (qr.householderQ() * Matrix::Identity(6, 2)).transpose();  // 2 x 6, S S^T = I
  const Matrix x = oracle::random_matrix(4, 6, rng);
  const Matrix r = oracle::random_matrix(4, 2, rng);
  const Matrix b = compute_b(DataMatrix(x), CoefficientMatrix(s), r, 2.0);
  EXPECT_TRUE(b.isApprox(0.5 * x * s.transpose() + 0.5 * r, 1e-12));
}

TEST(ComputeB, MatchesScalarEvaluation) {
  std::mt19937_64 rng(35);
  const Matrix x = oracle::random_matrix(3, 4, rng);
  const Matrix s = oracle::random_matrix(2, 4, rng);
  const Matrix r = oracle::random_matrix(3, 2, rng);
  const double c = 4.2;
  const Matrix b = compute_b(DataMatrix(x), CoefficientMatrix(s), r, c);
  for (int t = 0; t < 3; ++t)
    for (int k = 0; k < 2; ++k) {
      double xs = 0.0, rss = 0.0;
      for (int n = 0; n < 4; ++n) xs += x(t, n) * s(k, n);
      for (int j = 0; j < 2; ++j) {
        double ss = 0.0;
        for (int n = 0; n < 4; ++n) ss += s(j, n) * s(k, n);
        rss += r(t, j) * ss;
      }
      EXPECT_NEAR(b(t, k), (xs + c * r(t, k) - rss) / c, 1e-13);
    }
}

TEST(SurrogateGradient, VanishesAtB) {
  std::mt19937_64 rng(36);
  const Matrix x = oracle::random_matrix(6, 8, rng);
  const Matrix s = oracle::random_matrix(3, 8, rng);
  const Matrix r = oracle::random_matrix(6, 3, rng);
  const CoefficientMatrix sc(s);
  const double c = dictionary_step_constant(sc, 1.01);
  const Matrix b = compute_b(DataMatrix(x), sc, r, c);
  EXPECT_LE(surrogate_gradient(b, DataMatrix(x), sc, r, c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SurrogateGradient, ZeroCoefficients) {
  std::mt19937_64 rng(37);
  const Matrix x = oracle::random_matrix(4, 5, rng);
  const Matrix d = oracle::random_matrix(4, 2, rng);
  const Matrix r = oracle::random_matrix(4, 2, rng);
  const Matrix g = surrogate_gradient(d, DataMatrix(x), CoefficientMatrix::zeros(2, 5), r, 3.0);
  EXPECT_TRUE(g.isApprox(2.0 * 3.0 * (d - r), 1e-14));
}

TEST(SurrogateGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(38);
  const Matrix x = oracle::random_matrix(5, 6, rng);
  const CoefficientMatrix s(oracle::random_matrix(3, 6, rng));
  const Matrix r = oracle::random_matrix(5, 3, rng);
  const double c = dictionary_step_constant(s, 1.01);
  const Matrix d = compute_b(DataMatrix(x), s, r, c) + oracle::random_matrix(5, 3, rng, 0.3);
  const Matrix g = surrogate_gradient(d, DataMatrix(x), s, r, c);
  const Matrix fd = oracle::finite_difference(
      [&](const Matrix& m) { return surrogate_value(m, DataMatrix(x), s, r, c); }, d, 1e-6);
  EXPECT_LE((g - fd).norm(), 1e-5 * g.norm());
}

TEST(SurrogateValue, MajorizesResidualAndTouchesAtR) {
  std::mt19937_64 rng(39);
  const Matrix x = oracle::random_matrix(5, 7, rng);
  const CoefficientMatrix s(oracle::random_matrix(3, 7, rng));
  const Matrix r = oracle::random_matrix(5, 3, rng);
  const double c = dictionary_step_constant(s, 1.01);
  const DataMatrix xd(x);
  EXPECT_NEAR(surrogate_value(r, xd, s, r, c), (x - r * s.values()).squaredNorm(), 1e-10);
  for (int k = 0; k < 20; ++k) {
    const Matrix d = r + oracle::random_matrix(5, 3, rng);
    EXPECT_GE(surrogate_value(d, xd, s, r, c), (x - d * s.values()).squaredNorm() - 1e-9);
  }
}

TEST(DictionaryUpdate, ZeroCoefficientsKeepFeasibleStart) {
  std::mt19937_64 rng(40);
  const Matrix delta = oracle::random_matrix(6, 1, rng);
  const ConstraintSpec c;
  const Matrix atoms = feasible_atoms(delta, 3, c, rng);
  const Dictionary d0(atoms, AnchorSet(delta), c);
  const auto d1 = run_dictionary_update(DataMatrix(oracle::random_matrix(6, 4, rng)),
                                        CoefficientMatrix::zeros(3, 4), d0, DictStepConfig{});
  EXPECT_EQ(d1.atoms(), atoms);
}

TEST(DictionaryUpdate, ZeroRadiusCollapsesToAnchors) {
  std::mt19937_64 rng(41);
  const Matrix delta = oracle::random_matrix(6, 3, rng);
  ConstraintSpec c;
  c.c_delta = 0.0;
  const Dictionary d0(oracle::random_matrix(6, 3, rng), AnchorSet(delta), c);
  DictStepConfig cfg;
  cfg.n_inner = 1;
  const auto d1 = run_dictionary_update(DataMatrix(oracle::random_matrix(6, 5, rng)),
                                        CoefficientMatrix(oracle::random_matrix(3, 5, rng)), d0, cfg);
  EXPECT_EQ(d1.atoms(), delta);
}

TEST(DictionaryUpdate, ResidualNonIncreasingAndFeasibleEveryStep) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(200 + seed);
    const Matrix delta = oracle::random_matrix(8, 2, rng, 0.4);
    const ConstraintSpec c;
    const Dictionary d0(feasible_atoms(delta, 4, c, rng), AnchorSet(delta), c);
    const DataMatrix x(oracle::random_matrix(8, 12, rng));
    const CoefficientMatrix s(oracle::random_matrix(4, 12, rng));
    DictStepConfig cfg;
    cfg.n_inner = 100;
    double prev = (x.values() - d0.atoms() * s.values()).squaredNorm();
    run_dictionary_update(x, s, d0, cfg, [&](int, const Matrix& atoms) {
      const double cur = (x.values() - atoms * s.values()).squaredNorm();
      EXPECT_LE(cur, prev * (1.0 + 1e-10));
      prev = cur;
      EXPECT_TRUE(is_feasible(d0.with_atoms(atoms), 1e-12).feasible);
    });
  }
}

TEST(DictionaryUpdate, StepConstantForZeroCoefficients) {
  EXPECT_EQ(dictionary_step_constant(CoefficientMatrix::zeros(2, 3), 1.01), 1.0);
}
