#pragma once

// Minimal SimTB-style generator: each source is a 2-D map of Gaussian blobs
// paired with a time course (HRF-convolved events for brain sources, i.i.d.
// draws of a chosen kurtosis class for artifacts). X = D_true S_true + noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aadl/hrf.hpp"
#include "aadl/model.hpp"

namespace aadl::sim {

enum class SourceRole {
  TaskOfInterest,
  Physiological,
  ArtifactGaussian,
  ArtifactSubgaussian,
  ArtifactSupergaussian,
};

inline const char* to_string(SourceRole r) {
  switch (r) {
    case SourceRole::TaskOfInterest: return "task_of_interest";
    case SourceRole::Physiological: return "physiological";
    case SourceRole::ArtifactGaussian: return "artifact_gaussian";
    case SourceRole::ArtifactSubgaussian: return "artifact_subgaussian";
    case SourceRole::ArtifactSupergaussian: return "artifact_supergaussian";
  }
  return "?";
}

inline SourceRole role_from_string(const std::string& s) {
  for (auto r : {SourceRole::TaskOfInterest, SourceRole::Physiological,
                 SourceRole::ArtifactGaussian, SourceRole::ArtifactSubgaussian,
                 SourceRole::ArtifactSupergaussian})
    if (s == to_string(r)) return r;
  throw Error(ErrorKind::Parse, "unknown source role '" + s + "'");
}

inline bool is_artifact(SourceRole r) {
  return r == SourceRole::ArtifactGaussian || r == SourceRole::ArtifactSubgaussian ||
         r == SourceRole::ArtifactSupergaussian;
}

struct Blob {
  double center_x = 0.0;  // grid units, column
  double center_y = 0.0;  // grid units, row
  double sigma = 1.0;
  double amplitude = 1.0;
};

struct SourceSpec {
  SourceRole role = SourceRole::Physiological;
  std::vector<Blob> blobs;
  hrf::EventSequence events;  // used by task and physiological sources
  double energy = 1.0;        // target ||time course|| * ||spatial map||
};

struct Grid {
  int width = 40;
  int height = 40;
  Index voxels() const { return static_cast<Index>(width) * height; }
};

struct DatasetSpec {
  Grid grid{};
  Index t = 200;
  double tr = 2.0;
  std::vector<SourceSpec> sources;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  hrf::HrfParams true_hrf{};
};

struct SyntheticDataset {
  DataMatrix x;
  Matrix d_true;  // T x K_true
  Matrix s_true;  // K_true x N, unit-peak rows
  DatasetSpec spec;
  Index task_index = 0;

  const hrf::HrfParams& true_hrf() const { return spec.true_hrf; }
  Vector task_time_course() const { return d_true.col(task_index); }
  Vector task_map() const { return s_true.row(task_index).transpose(); }
};

/// Sum of isotropic Gaussian bumps on the grid, unfolded row-major
/// (index = y * width + x) and scaled to unit max absolute value.
inline Vector render_spatial_map(const std::vector<Blob>& blobs, const Grid& grid) {
  require(!blobs.empty(), ErrorKind::InvalidArgument, "spatial map needs at least one blob");
  require(grid.width > 0 && grid.height > 0, ErrorKind::InvalidArgument,
          "grid dimensions must be positive");
  Vector map = Vector::Zero(grid.voxels());
  for (const Blob& b : blobs) {
    require(b.sigma > 0.0, ErrorKind::InvalidArgument, "blob sigma must be > 0");
    const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
    for (int y = 0; y < grid.height; ++y)
      for (int x = 0; x < grid.width; ++x) {
        const double dx = x - b.center_x;
        const double dy = y - b.center_y;
        map(static_cast<Index>(y) * grid.width + x) +=
            b.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
      }
  }
  return hrf::unit_max_abs(std::move(map));
}

/// Voxels at or above half of the map's peak absolute value.
inline std::vector<bool> half_max_support(const Vector& map) {
  const double peak = map.cwiseAbs().maxCoeff();
  std::vector<bool> s(static_cast<std::size_t>(map.size()));
  for (Index i = 0; i < map.size(); ++i)
    s[static_cast<std::size_t>(i)] = peak > 0.0 && std::abs(map(i)) >= 0.5 * peak;
  return s;
}

inline bool supports_intersect(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (a[i] && b[i]) return true;
  return false;
}

/// Raw unit-variance draws: normal, uniform on [-sqrt3, sqrt3], or Laplace.
template <typename Rng>
Vector artifact_samples(SourceRole kind, Index t, Rng& rng) {
  require(is_artifact(kind), ErrorKind::InvalidArgument,
          std::string("not an artifact role: ") + to_string(kind));
  Vector v(t);
  switch (kind) {
    case SourceRole::ArtifactGaussian: {
      std::normal_distribution<double> d;
      for (Index i = 0; i < t; ++i) v(i) = d(rng);
      break;
    }
    case SourceRole::ArtifactSubgaussian: {
      const double a = std::sqrt(3.0);
      std::uniform_real_distribution<double> d(-a, a);
      for (Index i = 0; i < t; ++i) v(i) = d(rng);
      break;
    }
    default: {
      // Laplace with scale 1/sqrt(2) has unit variance; inverse-CDF sampling.
      const double b = 1.0 / std::sqrt(2.0);
      std::uniform_real_distribution<double> d(-0.5, 0.5);
      for (Index i = 0; i < t; ++i) {
        const double u = d(rng);
        v(i) = -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
      }
      break;
    }
  }
  return v;
}

template <typename Rng>
hrf::TimeCourse artifact_time_course(SourceRole kind, Index t, double tr, Rng& rng) {
  return hrf::TimeCourse{hrf::unit_max_abs(artifact_samples(kind, t, rng)), tr};
}

inline void validate(const DatasetSpec& spec) {
  require(spec.grid.width > 0 && spec.grid.height > 0, ErrorKind::InvalidArgument,
          "grid dimensions must be positive");
  require(spec.t >= 2, ErrorKind::InvalidArgument, "dataset needs t >= 2");
  require(spec.tr > 0.0, ErrorKind::InvalidArgument, "tr must be > 0");
  require(spec.noise_sigma >= 0.0 && std::isfinite(spec.noise_sigma),
          ErrorKind::InvalidArgument, "noise_sigma must be >= 0");
  spec.true_hrf.validate();
  const auto tasks = std::count_if(spec.sources.begin(), spec.sources.end(),
                                   [](const SourceSpec& s) {
                                     return s.role == SourceRole::TaskOfInterest;
                                   });
  require(tasks == 1, ErrorKind::InvalidArgument,
          "dataset must contain exactly one task_of_interest source, found " +
              std::to_string(tasks));
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const SourceSpec& s = spec.sources[i];
    const std::string tag = "source " + std::to_string(i) + ": ";
    require(!s.blobs.empty(), ErrorKind::InvalidArgument, tag + "no blobs");
    require(s.energy > 0.0, ErrorKind::InvalidArgument, tag + "energy must be > 0");
    for (const Blob& b : s.blobs)
      require(b.center_x >= 0.0 && b.center_x <= spec.grid.width - 1 &&
                  b.center_y >= 0.0 && b.center_y <= spec.grid.height - 1,
              ErrorKind::InvalidArgument, tag + "blob center outside the grid");
    if (!is_artifact(s.role)) {
      require(std::abs(s.events.tr - spec.tr) <= 1e-12, ErrorKind::InvalidArgument,
              tag + "event TR differs from dataset TR");
      require(s.events.samples() == spec.t, ErrorKind::InvalidArgument,
              tag + "event total_time does not span t samples");
    }
  }
}

namespace detail {

inline std::uint64_t noise_stream(std::uint64_t seed) {
  // splitmix64 finalizer; decorrelates the noise stream from the source stream.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Matrix gaussian_noise(Index rows, Index cols, double sigma, std::uint64_t seed) {
  Matrix e = Matrix::Zero(rows, cols);
  if (sigma == 0.0) return e;
  std::mt19937_64 rng(noise_stream(seed));
  std::normal_distribution<double> d(0.0, sigma);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) e(i, j) = d(rng);
  return e;
}

// Task map must share half-max support with an artifact and must not carry
// more energy than every source it overlaps.
inline void check_overlap_energy(const DatasetSpec& spec, const Matrix& s_true,
                                 Index task) {
  const auto task_support = half_max_support(s_true.row(task).transpose());
  bool hits_artifact = false;
  double max_neighbor_energy = 0.0;
  for (Index k = 0; k < s_true.rows(); ++k) {
    if (k == task) continue;
    const auto sup = half_max_support(s_true.row(k).transpose());
    if (!supports_intersect(task_support, sup)) continue;
    const SourceSpec& src = spec.sources[static_cast<std::size_t>(k)];
    hits_artifact = hits_artifact || is_artifact(src.role);
    max_neighbor_energy = std::max(max_neighbor_energy, src.energy);
  }
  require(hits_artifact, ErrorKind::InvalidArgument,
          "task_of_interest map does not overlap any artifact map");
  require(spec.sources[static_cast<std::size_t>(task)].energy <= max_neighbor_energy,
          ErrorKind::InvalidArgument,
          "task_of_interest energy exceeds every spatially overlapping source");
}

}  // namespace detail

inline SyntheticDataset generate(const DatasetSpec& spec) {
  validate(spec);
  const Index k_true = static_cast<Index>(spec.sources.size());
  const Index n = spec.grid.voxels();
  const hrf::TimeCourse h = hrf::canonical_hrf(spec.true_hrf, spec.tr);

  std::mt19937_64 rng(spec.seed);
  Matrix d_true(spec.t, k_true);
  Matrix s_true(k_true, n);
  Index task = 0;
  for (Index k = 0; k < k_true; ++k) {
    const SourceSpec& src = spec.sources[static_cast<std::size_t>(k)];
    Vector tc = is_artifact(src.role)
                    ? artifact_time_course(src.role, spec.t, spec.tr, rng).samples
                    : hrf::convolve_events(src.events, h).samples;
    const Vector map = render_spatial_map(src.blobs, spec.grid);
    const double tn = tc.norm();
    require(tn > 0.0, ErrorKind::InvalidArgument,
            "source " + std::to_string(k) + " has an all-zero time course");
    tc *= src.energy / (tn * map.norm());
    d_true.col(k) = tc;
    s_true.row(k) = map.transpose();
    if (src.role == SourceRole::TaskOfInterest) task = k;
  }
  detail::check_overlap_energy(spec, s_true, task);

  Matrix x = d_true * s_true;
  x += detail::gaussian_noise(spec.t, n, spec.noise_sigma, spec.seed);
  return SyntheticDataset{DataMatrix(std::move(x)), std::move(d_true),
                          std::move(s_true), spec, task};
}

/// Same sources, fresh noise drawn from `noise_seed`.
inline SyntheticDataset with_fresh_noise(const SyntheticDataset& ds,
                                         std::uint64_t noise_seed) {
  Matrix x = ds.d_true * ds.s_true;
  x += detail::gaussian_noise(x.rows(), x.cols(), ds.spec.noise_sigma, noise_seed);
  return SyntheticDataset{DataMatrix(std::move(x)), ds.d_true, ds.s_true, ds.spec,
                          ds.task_index};
}

/// Block design: `on` seconds of activity starting at `first`, repeating
/// every `period` seconds until `total` seconds.
inline hrf::EventSequence block_design(double first, double on, double period,
                                       double total, double tr) {
  hrf::EventSequence ev;
  ev.total_time = total;
  ev.tr = tr;
  for (double t0 = first; t0 + on <= total + 1e-9; t0 += period) {
    ev.onsets.push_back(t0);
    ev.durations.push_back(on);
  }
  return ev;
}

}  // namespace aadl::sim

#include "aadl/simgen_default.hpp"
