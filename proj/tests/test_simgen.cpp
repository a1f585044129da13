#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aadl/simgen.hpp"
#include "oracles.hpp"

using namespace aadl;
using namespace aadl::sim;

TEST(SpatialMap, SingleBlobPeaksAtCenter) {
  const Grid g{15, 11};
  const Vector m = render_spatial_map({{9, 4, 0.7, 1.0}}, g);
  Index arg = 0;
  m.maxCoeff(&arg);
  EXPECT_EQ(arg, 4 * 15 + 9);
  EXPECT_DOUBLE_EQ(m.cwiseAbs().maxCoeff(), 1.0);
}

TEST(SpatialMap, MirrorSymmetricPair) {
  const Grid g{20, 10};
  const Vector m = render_spatial_map({{5, 4, 2.0, 1.0}, {14, 4, 2.0, 1.0}}, g);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_NEAR(m(y * 20 + x), m(y * 20 + (19 - x)), 1e-15);
}

TEST(SpatialMap, OneSigmaFromCenter) {
  const Grid g{21, 21};
  const double sigma = 3.0;
  const Vector m = render_spatial_map({{10, 10, sigma, 1.0}}, g);
  EXPECT_NEAR(m(10 * 21 + 13), std::exp(-0.5) * m(10 * 21 + 10), 1e-9);
  EXPECT_NEAR(m(7 * 21 + 10), std::exp(-0.5) * m(10 * 21 + 10), 1e-9);
}

TEST(Artifacts, KurtosisAndMean) {
  struct Case {
    SourceRole role;
    double kurtosis;
    double tol;
  };
  for (const Case c : {Case{SourceRole::ArtifactGaussian, 0.0, 0.1},
                       Case{SourceRole::ArtifactSubgaussian, -1.2, 0.1},
                       Case{SourceRole::ArtifactSupergaussian, 3.0, 0.3}}) {
    std::mt19937_64 rng(77);
    const Vector v = artifact_samples(c.role, 100000, rng);
    const auto m = oracle::moments(v);
    EXPECT_NEAR(m.excess_kurtosis, c.kurtosis, c.tol) << to_string(c.role);
    EXPECT_NEAR(m.mean, 0.0, 0.05) << to_string(c.role);
    EXPECT_NEAR(m.variance, 1.0, 0.03) << to_string(c.role);
  }
}

TEST(Artifacts, SameSeedBitwise) {
  std::mt19937_64 a(5), b(5);
  EXPECT_EQ(artifact_samples(SourceRole::ArtifactSupergaussian, 1000, a),
            artifact_samples(SourceRole::ArtifactSupergaussian, 1000, b));
  std::mt19937_64 c(5);
  EXPECT_THROW(artifact_samples(SourceRole::Physiological, 10, c), Error);
}

TEST(Generate, NoiselessTwoSourcesHaveRankTwo) {
  DatasetSpec spec;
  spec.grid = {12, 12};
  spec.t = 60;
  spec.noise_sigma = 0.0;
  SourceSpec task;
  task.role = SourceRole::TaskOfInterest;
  task.blobs = {{6, 6, 2.0, 1.0}};
  task.events = block_design(10, 20, 50, 120, 2.0);
  SourceSpec art;
  art.role = SourceRole::ArtifactGaussian;
  art.blobs = {{6, 6, 3.0, 1.0}};
  art.energy = 2.0;
  spec.sources = {task, art};
  const auto ds = generate(spec);
  Eigen::JacobiSVD<Matrix> svd(ds.x.values());
  const Vector sv = svd.singularValues();
  int rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-8 * sv(0);
  EXPECT_EQ(rank, 2);

  spec.sources = {task};
  EXPECT_THROW(generate(spec), Error);  // the task map must overlap an artifact
}

TEST(Generate, RankOneWithoutNoise) {
  DatasetSpec spec;
  spec.grid = {8, 8};
  spec.t = 30;
  spec.noise_sigma = 0.0;
  SourceSpec task;
  task.role = SourceRole::TaskOfInterest;
  task.blobs = {{4, 4, 2.0, 1.0}};
  task.events = block_design(0, 10, 30, 60, 2.0);
  spec.sources = {task};
  const Vector tc = hrf::convolve_events(task.events, hrf::canonical_hrf({}, 2.0)).samples;
  const Vector map = render_spatial_map(task.blobs, spec.grid);
  const Matrix x = tc * map.transpose();
  Eigen::JacobiSVD<Matrix> svd(x);
  EXPECT_LT(svd.singularValues()(1), 1e-8 * svd.singularValues()(0));
}

TEST(Generate, DefaultSpecShapesAndDeterminism) {
  const auto spec = default_dataset_spec();
  EXPECT_EQ(spec.sources.size(), 20u);
  int artifacts[3] = {0, 0, 0}, phys = 0;
  for (const auto& s : spec.sources) {
    if (s.role == SourceRole::Physiological) ++phys;
    if (s.role == SourceRole::ArtifactGaussian) ++artifacts[0];
    if (s.role == SourceRole::ArtifactSubgaussian) ++artifacts[1];
    if (s.role == SourceRole::ArtifactSupergaussian) ++artifacts[2];
  }
  EXPECT_EQ(phys, 11);
  EXPECT_EQ(artifacts[0], 3);
  EXPECT_EQ(artifacts[1], 3);
  EXPECT_EQ(artifacts[2], 2);

  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.x.time_points(), 200);
  EXPECT_EQ(a.x.voxels(), 1600);
  EXPECT_EQ(a.x.values(), b.x.values());
  EXPECT_EQ(a.d_true.cols(), 20);
}

TEST(Generate, DefaultSnrMatchesNoiseLevel) {
  const auto spec = default_dataset_spec();
  const auto ds = generate(spec);
  const Matrix signal = ds.d_true * ds.s_true;
  const double measured = signal.norm() / (ds.x.values() - signal).norm();
  const double implied =
      signal.norm() / (spec.noise_sigma * std::sqrt(static_cast<double>(signal.size())));
  EXPECT_NEAR(measured, implied, 0.05 * implied);
  EXPECT_NEAR(measured, 3.0, 0.3);
}

TEST(Generate, SourceEnergyIsProductOfNorms) {
  const auto spec = default_dataset_spec();
  const auto ds = generate(spec);
  for (Index k = 0; k < ds.d_true.cols(); ++k)
    EXPECT_NEAR(ds.d_true.col(k).norm() * ds.s_true.row(k).norm(),
                spec.sources[static_cast<std::size_t>(k)].energy, 1e-10);
  EXPECT_NEAR(ds.s_true.cwiseAbs().rowwise().maxCoeff().minCoeff(), 1.0, 1e-15);
}

TEST(Generate, TaskOverlapsArtifactAndIsNotDominant) {
  const auto ds = generate(default_dataset_spec());
  ASSERT_EQ(ds.spec.sources[static_cast<std::size_t>(ds.task_index)].role,
            SourceRole::TaskOfInterest);
  const auto task = half_max_support(ds.task_map());
  bool overlaps_artifact = false;
  for (Index k = 0; k < ds.s_true.rows(); ++k) {
    if (k == ds.task_index) continue;
    if (supports_intersect(task, half_max_support(ds.s_true.row(k).transpose())) &&
        is_artifact(ds.spec.sources[static_cast<std::size_t>(k)].role))
      overlaps_artifact = true;
  }
  EXPECT_TRUE(overlaps_artifact);
}

TEST(Generate, ValidationNamesCondition) {
  auto spec = default_dataset_spec();
  spec.sources[1].role = SourceRole::TaskOfInterest;
  try {
    generate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("exactly one task_of_interest"), std::string::npos);
  }
  spec = default_dataset_spec();
  spec.sources[0].energy = 50.0;
  try {
    generate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("energy exceeds"), std::string::npos);
  }
}

TEST(Generate, FreshNoiseKeepsSources) {
  const auto ds = generate(default_dataset_spec());
  const auto other = with_fresh_noise(ds, 12345);
  EXPECT_EQ(other.d_true, ds.d_true);
  EXPECT_EQ(other.s_true, ds.s_true);
  EXPECT_NE(other.x.values(), ds.x.values());
  const Matrix signal = ds.d_true * ds.s_true;
  EXPECT_NEAR((other.x.values() - signal).norm(), (ds.x.values() - signal).norm(),
              0.01 * (ds.x.values() - signal).norm());
}

TEST(BlockDesign, OnsetsAndDurations) {
  const auto ev = block_design(20, 20, 60, 400, 2.0);
  ASSERT_EQ(ev.onsets.size(), 7u);
  EXPECT_EQ(ev.onsets.front(), 20.0);
  EXPECT_EQ(ev.onsets.back(), 380.0);
  for (double d : ev.durations) EXPECT_EQ(d, 20.0);
}
