#pragma once

// Robustness sweeps: impose a deliberately mis-modelled task time course as
// the anchor (time-shifted, or built with a narrower HRF), fit every method
// for every seed, and score recovery of the task map.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "aadl/eval.hpp"
#include "aadl/hrf.hpp"
#include "aadl/simgen.hpp"
#include "aadl/solver.hpp"
#include "aadl/storage.hpp"

namespace aadl::experiment {

/// Runs task(i) for i in [0, n) on `workers` threads. Each index is executed
/// exactly once; the first exception is rethrown after all threads join.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Imposed anchors are unit l2-norm, the same scale as the free-atom bound
/// c_d = 1, so that c_delta reads as an angular tolerance.
inline AnchorSet unit_norm_anchor(const Vector& course) {
  const double n = course.norm();
  require(n > 0.0, ErrorKind::InvalidArgument, "imposed time course is all zero");
  Matrix m = course / n;
  return AnchorSet(std::move(m));
}

/// Task time course of the dataset as designed (unit peak, before energy scaling).
inline hrf::TimeCourse true_task_course(const sim::SyntheticDataset& ds) {
  const auto& src = ds.spec.sources[static_cast<std::size_t>(ds.task_index)];
  return hrf::convolve_events(src.events, hrf::canonical_hrf(ds.spec.true_hrf, ds.spec.tr));
}

struct SweepSettings {
  std::vector<Mode> methods{Mode::AtomAssisted, Mode::SdlFixed, Mode::Blind};
  std::vector<std::uint64_t> seeds;
  SolverConfig solver{};  // method, anchors and seed are filled per run
  unsigned workers = 1;
  bool reseed_noise = false;
  // Called after every fit, possibly from several threads at once.
  std::function<void(const FitResult&)> on_fit;
};

/// Desk-scale solver budget used by the sweeps. Sweeps use the exact
/// proximal threshold.
inline SolverConfig desk_solver() {
  SolverConfig c;
  c.coef_cfg.threshold_mode = ThresholdMode::ExactProx;
  c.n_outer = 100;
  c.coef_cfg.n_inner = 20;
  c.dict_cfg.n_inner = 20;
  return c;
}

inline SolverConfig paper_solver() {
  SolverConfig c;
  c.coef_cfg.threshold_mode = ThresholdMode::ExactProx;
  c.n_outer = 500;
  c.coef_cfg.n_inner = 100;
  c.dict_cfg.n_inner = 100;
  return c;
}

inline std::vector<std::uint64_t> default_seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

struct CurvePoint {
  double x = 0.0;  // shift in seconds, or HRF r^2
  Mode method = Mode::AtomAssisted;
  eval::EnsembleStats stats;
  std::vector<eval::RecoveryScore> scores;  // one per seed, in seed order
};

/// Fits method x seed at each sweep point, with anchors[p] imposed at point p.
inline std::vector<CurvePoint> run_sweep(const sim::SyntheticDataset& ds,
                                         const std::vector<double>& xs,
                                         const std::vector<AnchorSet>& anchors,
                                         const SweepSettings& set) {
  require(xs.size() == anchors.size(), ErrorKind::InvalidArgument,
          "sweep points and anchors differ in count");
  require(!set.seeds.empty(), ErrorKind::InvalidArgument, "sweep needs at least one seed");
  require(!set.methods.empty(), ErrorKind::InvalidArgument, "sweep needs at least one method");
  const std::size_t n_pts = xs.size();
  const std::size_t n_m = set.methods.size();
  const std::size_t n_s = set.seeds.size();

  std::vector<sim::SyntheticDataset> data;
  if (set.reseed_noise)
    for (auto seed : set.seeds) data.push_back(sim::with_fresh_noise(ds, seed));

  // Blind fits never read the anchor, so they are run once per seed and
  // shared across sweep points.
  std::vector<std::size_t> jobs;
  for (std::size_t idx = 0; idx < n_pts * n_m * n_s; ++idx) {
    const std::size_t p = idx / (n_m * n_s);
    const std::size_t m = (idx / n_s) % n_m;
    if (p == 0 || set.methods[m] != Mode::Blind) jobs.push_back(idx);
  }

  std::vector<eval::RecoveryScore> scores(n_pts * n_m * n_s);
  parallel_for(jobs.size(), set.workers, [&](std::size_t j) {
    const std::size_t idx = jobs[j];
    const std::size_t p = idx / (n_m * n_s);
    const std::size_t m = (idx / n_s) % n_m;
    const std::size_t s = idx % n_s;
    SolverConfig cfg = set.solver;
    cfg.constraints.mode = set.methods[m];
    cfg.anchors = anchors[p];
    cfg.seed = set.seeds[s];
    const auto& truth = set.reseed_noise ? data[s] : ds;
    const FitResult res = fit(truth.x, cfg);
    if (set.on_fit) set.on_fit(res);
    scores[idx] = eval::score_recovery(res, truth, truth.task_index);
  });
  for (std::size_t idx = n_m * n_s; idx < scores.size(); ++idx) {
    const std::size_t m = (idx / n_s) % n_m;
    if (set.methods[m] == Mode::Blind) scores[idx] = scores[idx % (n_m * n_s)];
  }

  std::vector<CurvePoint> curve;
  for (std::size_t p = 0; p < n_pts; ++p)
    for (std::size_t m = 0; m < n_m; ++m) {
      CurvePoint cp;
      cp.x = xs[p];
      cp.method = set.methods[m];
      const auto first = scores.begin() + static_cast<std::ptrdiff_t>((p * n_m + m) * n_s);
      cp.scores.assign(first, first + static_cast<std::ptrdiff_t>(n_s));
      cp.stats = eval::ensemble(cp.scores);
      curve.push_back(std::move(cp));
    }
  return curve;
}

inline std::vector<double> default_shifts() { return {-8, -6, -4, -2, 0, 2, 4, 6, 8}; }
inline std::vector<double> default_hrf_scales() { return {1.0, 0.9, 0.8, 0.7, 0.6, 0.5}; }

/// Rejects any shift that is not a whole number of samples before fitting.
inline std::vector<AnchorSet> shift_anchors(const sim::SyntheticDataset& ds,
                                            const std::vector<double>& shifts) {
  const hrf::TimeCourse truth = true_task_course(ds);
  std::vector<hrf::TimeCourse> shifted;
  for (double s : shifts) shifted.push_back(hrf::shift_time_course(truth, s));
  std::vector<AnchorSet> out;
  for (const auto& tc : shifted) out.push_back(unit_norm_anchor(tc.samples));
  return out;
}

inline std::vector<CurvePoint> sweep_shift(const sim::SyntheticDataset& ds,
                                           const std::vector<double>& shifts,
                                           const SweepSettings& set) {
  return run_sweep(ds, shifts, shift_anchors(ds, shifts), set);
}

struct HrfAnchors {
  std::vector<double> r_squared;
  std::vector<AnchorSet> anchors;
};

inline HrfAnchors hrf_anchors(const sim::SyntheticDataset& ds,
                              const std::vector<double>& scales) {
  const auto family = hrf::narrowed_hrf_family(ds.spec.true_hrf, scales, ds.spec.tr);
  const auto& events = ds.spec.sources[static_cast<std::size_t>(ds.task_index)].events;
  HrfAnchors out;
  for (const auto& member : family) {
    out.r_squared.push_back(member.r_squared);
    out.anchors.push_back(
        unit_norm_anchor(hrf::convolve_events(events, member.response).samples));
  }
  return out;
}

inline std::vector<CurvePoint> sweep_hrf(const sim::SyntheticDataset& ds,
                                         const std::vector<double>& scales,
                                         const SweepSettings& set) {
  const HrfAnchors a = hrf_anchors(ds, scales);
  return run_sweep(ds, a.r_squared, a.anchors, set);
}

/// Curve CSV with the given x-column name; one row per (point, method).
inline std::string curve_csv(const std::vector<CurvePoint>& curve, const std::string& x_name) {
  std::string out = x_name + ",method,mean_one_minus_r2,std_one_minus_r2,n_seeds\n";
  for (const auto& cp : curve) {
    out += storage::format_double(cp.x) + "," + to_string(cp.method) + "," +
           storage::format_double(cp.stats.mean) + "," +
           storage::format_double(cp.stats.stddev) + "," + std::to_string(cp.stats.count) + "\n";
  }
  return out;
}

}  // namespace aadl::experiment
