#pragma once

// Desk-scale default dataset: 40x40 grid, 200 scans at TR = 2 s, 20 sources
// (1 task of interest, 11 physiological, 3 + 3 + 2 artifacts). The task
// source is weak and sits in a crowded region: its map overlaps artifact and
// brain maps that each carry several times its energy.

#include <cmath>
#include <cstdint>
#include <random>

#include "aadl/simgen.hpp"

namespace aadl::sim {

inline SourceSpec make_source(SourceRole role, std::vector<Blob> blobs, double energy,
                              hrf::EventSequence events = {}) {
  SourceSpec s;
  s.role = role;
  s.blobs = std::move(blobs);
  s.energy = energy;
  s.events = std::move(events);
  return s;
}

inline DatasetSpec default_dataset_spec(std::uint64_t seed = 2) {
  DatasetSpec spec;
  spec.grid = {40, 40};
  spec.t = 200;
  spec.tr = 2.0;
  spec.seed = seed;
  const double total = static_cast<double>(spec.t) * spec.tr;
  const double tr = spec.tr;

  using R = SourceRole;
  auto& src = spec.sources;

  // Task of interest: 20 s on / 40 s off.
  src.push_back(make_source(R::TaskOfInterest, {{20, 20, 2.5, 1.0}}, 1.6,
                            block_design(20, 20, 60, total, tr)));

  // Physiological sources. Block designs with assorted periods and phases,
  // plus event-related designs on a fixed layout-only generator.
  src.push_back(make_source(R::Physiological, {{23, 23, 3.0, 1.0}}, 8.0,
                            block_design(40, 16, 50, total, tr)));
  src.push_back(make_source(R::Physiological, {{16, 18, 3.0, 1.0}}, 8.0,
                            block_design(6, 12, 36, total, tr)));
  src.push_back(make_source(R::Physiological, {{8, 8, 3.5, 1.0}}, 10.0,
                            block_design(10, 30, 90, total, tr)));
  src.push_back(make_source(R::Physiological, {{32, 8, 3.0, 1.0}}, 9.0,
                            block_design(0, 24, 70, total, tr)));
  src.push_back(make_source(R::Physiological, {{8, 32, 3.0, 1.0}}, 9.0,
                            block_design(14, 10, 44, total, tr)));
  src.push_back(make_source(R::Physiological, {{32, 32, 3.5, 1.0}}, 10.0,
                            block_design(30, 40, 110, total, tr)));
  src.push_back(make_source(R::Physiological, {{20, 6, 3.0, 1.0}, {20, 34, 3.0, 0.8}},
                            9.0, block_design(4, 8, 28, total, tr)));

  std::mt19937_64 layout(0xa55157edULL);
  std::uniform_real_distribution<double> gap(10.0, 30.0);
  auto event_related = [&]() {
    hrf::EventSequence ev;
    ev.total_time = total;
    ev.tr = tr;
    for (double t0 = gap(layout); t0 + tr <= total; t0 += gap(layout)) {
      // Snap to the sampling grid so every event lands on a sample.
      ev.onsets.push_back(std::floor(t0 / tr) * tr);
      ev.durations.push_back(2.0 * tr);
    }
    return ev;
  };
  src.push_back(make_source(R::Physiological, {{6, 20, 3.0, 1.0}}, 8.0, event_related()));
  src.push_back(make_source(R::Physiological, {{34, 20, 3.0, 1.0}}, 8.0, event_related()));
  src.push_back(make_source(R::Physiological, {{26, 14, 2.5, 1.0}}, 7.0, event_related()));
  src.push_back(make_source(R::Physiological, {{14, 27, 2.5, 1.0}}, 7.0, event_related()));

  // Artifacts, grouped by kurtosis class.
  src.push_back(make_source(R::ArtifactGaussian, {{22, 18, 5.0, 1.0}}, 9.0));
  src.push_back(make_source(R::ArtifactGaussian, {{4, 36, 4.0, 1.0}}, 8.0));
  src.push_back(make_source(R::ArtifactGaussian, {{36, 4, 4.0, 1.0}}, 8.0));
  src.push_back(make_source(R::ArtifactSubgaussian, {{18, 23, 5.0, 1.0}}, 9.0));
  src.push_back(make_source(R::ArtifactSubgaussian, {{0, 0, 6.0, 1.0}}, 8.0));
  src.push_back(make_source(R::ArtifactSubgaussian, {{39, 39, 6.0, 1.0}}, 8.0));
  src.push_back(make_source(R::ArtifactSupergaussian, {{20, 20, 8.0, 1.0}}, 10.0));
  src.push_back(make_source(R::ArtifactSupergaussian, {{10, 26, 4.0, 1.0}}, 8.0));

  spec.noise_sigma = 0.023;  // signal-to-noise ratio (Frobenius) of about 3
  return spec;
}

}  // namespace aadl::sim
