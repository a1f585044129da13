#pragma once

// Outer alternating minimization: Step I (coefficients) then Step II
// (dictionary), a fixed number of times, starting from S = 0.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aadl/coefficient_update.hpp"
#include "aadl/dictionary_update.hpp"
#include "aadl/model.hpp"

namespace aadl {

enum class InitMode { AnchorPlusRandom, AllRandom };

inline const char* to_string(InitMode m) {
  return m == InitMode::AllRandom ? "all_random" : "anchor_plus_random";
}

inline InitMode init_mode_from_string(const std::string& s) {
  if (s == "anchor_plus_random") return InitMode::AnchorPlusRandom;
  if (s == "all_random") return InitMode::AllRandom;
  throw Error(ErrorKind::InvalidArgument, "unknown init mode '" + s + "'");
}

struct SolverConfig {
  Index k = 20;
  double lambda = 0.1;
  ConstraintSpec constraints{};
  AnchorSet anchors{};
  int n_outer = 500;
  CoefStepConfig coef_cfg{};
  DictStepConfig dict_cfg{};
  std::uint64_t seed = 0;
  InitMode init = InitMode::AnchorPlusRandom;

  // Blind fits never see the anchors, whatever was supplied.
  AnchorSet effective_anchors(Index time_points) const {
    if (constraints.mode == Mode::Blind) return AnchorSet::none(time_points);
    return anchors;
  }

  CoefStepConfig coefficient_step() const {
    CoefStepConfig c = coef_cfg;
    c.lambda = lambda;
    return c;
  }

  void validate() const {
    require(k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
    require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::InvalidArgument,
            "lambda must be > 0");
    require(n_outer >= 1, ErrorKind::InvalidArgument, "n_outer must be >= 1");
    constraints.validate();
    coefficient_step().validate();
    dict_cfg.validate();
    if (constraints.mode != Mode::Blind)
      require(anchors.count() <= k, ErrorKind::InvalidArgument,
              "anchor count M=" + std::to_string(anchors.count()) +
                  " exceeds k=" + std::to_string(k));
  }
};

struct IterationRecord {
  double objective = 0.0;
  double residual = 0.0;       // ||X - DS||_F
  double zero_fraction = 0.0;  // share of exactly-zero entries in S
  double max_excess = 0.0;     // worst constraint violation of D
};

struct FitResult {
  Dictionary dictionary;
  CoefficientMatrix coefficients;
  std::vector<IterationRecord> history;
  SolverConfig config;
  double wall_seconds = 0.0;
};

inline Dictionary init_dictionary(const SolverConfig& cfg, Index time_points) {
  cfg.validate();
  const AnchorSet anchors = cfg.effective_anchors(time_points);
  require(anchors.empty() || anchors.time_points() == time_points,
          ErrorKind::DimensionMismatch,
          "anchor length " + std::to_string(anchors.time_points()) +
              " does not match data T=" + std::to_string(time_points));
  const Index m = anchors.count();

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  Matrix atoms(time_points, cfg.k);
  for (Index j = 0; j < cfg.k; ++j)
    for (Index i = 0; i < time_points; ++i) atoms(i, j) = normal(rng);

  if (cfg.init == InitMode::AnchorPlusRandom) {
    if (m > 0) atoms.leftCols(m) = anchors.deltas();
    if (std::isfinite(cfg.constraints.c_d)) {
      const double radius = std::sqrt(cfg.constraints.c_d);
      for (Index j = m; j < cfg.k; ++j) {
        const double nrm = atoms.col(j).norm();
        if (nrm > 0.0) atoms.col(j) *= radius / nrm;
      }
    }
  }
  project_columns(atoms, anchors, cfg.constraints);
  return Dictionary(std::move(atoms), anchors, cfg.constraints);
}

inline IterationRecord make_record(const DataMatrix& x, const Dictionary& d,
                                   const CoefficientMatrix& s, double lambda) {
  IterationRecord rec;
  rec.residual = residual_fro(x, d, s);
  rec.objective = rec.residual * rec.residual + lambda * s.values().cwiseAbs().sum();
  rec.zero_fraction = s.zero_fraction();
  rec.max_excess = is_feasible(d).max_excess;
  return rec;
}

/// Observer hook: called as observe(t, D_(t), S_(t)) after each outer iteration.
struct NoOuterObserver {
  void operator()(int, const Dictionary&, const CoefficientMatrix&) const noexcept {}
};

template <typename Observer = NoOuterObserver>
FitResult fit(const DataMatrix& x, const SolverConfig& cfg, Observer&& observe = {}) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const CoefStepConfig coef_cfg = cfg.coefficient_step();

  Dictionary d = init_dictionary(cfg, x.time_points());
  CoefficientMatrix s = CoefficientMatrix::zeros(cfg.k, x.voxels());

  std::vector<IterationRecord> history;
  history.reserve(static_cast<std::size_t>(cfg.n_outer));
  for (int t = 1; t <= cfg.n_outer; ++t) {
    try {
      s = run_coefficient_update(x, d, s, coef_cfg);
      d = run_dictionary_update(x, s, d, cfg.dict_cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NumericalFailure) throw;
      throw Error(ErrorKind::NumericalFailure,
                  "outer iteration " + std::to_string(t) + ": " + e.what());
    }
    history.push_back(make_record(x, d, s, cfg.lambda));
    require(std::isfinite(history.back().objective), ErrorKind::NumericalFailure,
            "outer iteration " + std::to_string(t) + ": objective overflowed");
    observe(t, static_cast<const Dictionary&>(d),
            static_cast<const CoefficientMatrix&>(s));
  }

  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  return FitResult{std::move(d), std::move(s), std::move(history), cfg,
                   elapsed.count()};
}

}  // namespace aadl
