#pragma once

// Command implementations behind the aadl tool. Each command throws
// aadl::Error on failure; exit_code() maps the error kind to the process
// exit status.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "aadl/config.hpp"
#include "aadl/eval.hpp"
#include "aadl/experiment.hpp"
#include "aadl/simgen.hpp"
#include "aadl/solver.hpp"
#include "aadl/storage.hpp"

namespace aadl::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

inline int exit_code(const Error& e) {
  return e.kind() == ErrorKind::NumericalFailure ? kExitNumerical : kExitUsage;
}

inline const std::vector<std::string>& bundle_matrix_files() {
  static const std::vector<std::string> files{"X.csv", "D_true.csv", "S_true.csv"};
  return files;
}

/// Creates `dir` if needed. An existing non-empty directory is refused
/// unless `force` is set.
inline void prepare_out_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    require(fs::is_directory(dir, ec), ErrorKind::Io, dir.string() + " is not a directory");
    require(force || fs::is_empty(dir, ec), ErrorKind::InvalidArgument,
            "output directory " + dir.string() + " is not empty (use --force to overwrite)");
    return;
  }
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

inline void prepare_out_file(const fs::path& file, bool force) {
  std::error_code ec;
  require(force || !fs::exists(file, ec), ErrorKind::InvalidArgument,
          file.string() + " already exists (use --force to overwrite)");
  if (file.has_parent_path()) {
    fs::create_directories(file.parent_path(), ec);
    require(!ec, ErrorKind::Io, "cannot create " + file.parent_path().string());
  }
}

inline std::vector<Mode> parse_methods(const std::string& list) {
  std::vector<Mode> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string::npos) comma = list.size();
    const std::string item = list.substr(start, comma - start);
    if (!item.empty()) out.push_back(mode_from_string(item));
    start = comma + 1;
  }
  require(!out.empty(), ErrorKind::InvalidArgument, "empty method list");
  return out;
}

inline json dataset_meta(const sim::SyntheticDataset& ds) {
  json roles = json::array();
  for (const auto& s : ds.spec.sources) roles.push_back(sim::to_string(s.role));
  return json{{"seed", ds.spec.seed},
              {"tr_s", ds.spec.tr},
              {"grid", {{"width", ds.spec.grid.width}, {"height", ds.spec.grid.height}}},
              {"t", ds.spec.t},
              {"n", ds.spec.grid.voxels()},
              {"source_roles", std::move(roles)},
              {"task_index", ds.task_index},
              {"true_hrf", config::hrf_to_json(ds.spec.true_hrf, ds.spec.tr)},
              {"spec", config::dataset_spec_to_json(ds.spec)}};
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

inline sim::DatasetSpec load_dataset_spec(const std::optional<fs::path>& path) {
  if (!path) return sim::default_dataset_spec();
  return config::dataset_spec_from_json(storage::read_json(*path));
}

/// Writes X.csv, D_true.csv, S_true.csv, meta.json and manifest.json into
/// opt.out and prints the manifest.
inline storage::BundleManifest cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  sim::DatasetSpec spec = load_dataset_spec(opt.config);
  if (opt.seed) spec.seed = *opt.seed;
  const sim::SyntheticDataset ds = sim::generate(spec);

  prepare_out_dir(opt.out, opt.force);
  storage::write_matrix(ds.x.values(), opt.out / "X.csv");
  storage::write_matrix(ds.d_true, opt.out / "D_true.csv");
  storage::write_matrix(ds.s_true, opt.out / "S_true.csv");
  storage::write_json(dataset_meta(ds), opt.out / "meta.json");

  const auto manifest = storage::make_manifest(opt.out, bundle_matrix_files(), {"meta.json"});
  storage::write_json(manifest.to_json(), opt.out / "manifest.json");
  out << manifest.to_json().dump(2) << "\n";
  return manifest;
}

/// Reads a bundle written by cmd_generate. When manifest.json is present
/// every file is checked against it first.
inline sim::SyntheticDataset load_bundle(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorKind::Io, "no dataset bundle at " + dir.string());
  if (fs::exists(dir / "manifest.json")) {
    const json mj = storage::read_json(dir / "manifest.json");
    storage::BundleManifest m;
    try {
      for (const auto& f : mj.at("files"))
        m.entries.push_back({f.at("file").get<std::string>(), config::get_or<Index>(f, "rows", 0),
                             config::get_or<Index>(f, "cols", 0),
                             f.at("sha256").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, (dir / "manifest.json").string() + ": " + e.what());
    }
    const auto bad = storage::verify_manifest(dir, m);
    if (!bad.empty()) {
      std::string names;
      for (const auto& b : bad) names += (names.empty() ? "" : ", ") + b;
      throw Error(ErrorKind::Io, "bundle " + dir.string() + " fails its manifest: " + names);
    }
  }
  const json meta = storage::read_json(dir / "meta.json");
  require(meta.contains("spec"), ErrorKind::Parse, "meta.json has no spec");
  sim::DatasetSpec spec = config::dataset_spec_from_json(meta.at("spec"));
  Matrix x = storage::read_matrix(dir / "X.csv");
  Matrix d_true = storage::read_matrix(dir / "D_true.csv");
  Matrix s_true = storage::read_matrix(dir / "S_true.csv");
  require(d_true.rows() == x.rows() && s_true.cols() == x.cols() &&
              d_true.cols() == s_true.rows(),
          ErrorKind::DimensionMismatch, "bundle matrices have inconsistent shapes");
  sim::SyntheticDataset ds{DataMatrix(std::move(x)), std::move(d_true), std::move(s_true),
                           std::move(spec), config::get_or<Index>(meta, "task_index", 0)};
  require(ds.task_index >= 0 && ds.task_index < ds.d_true.cols(), ErrorKind::Parse,
          "meta.json task_index out of range");
  return ds;
}

// --------------------------------------------------------------------- fit

struct FitOptions {
  fs::path data;
  std::optional<fs::path> config;   // solver JSON
  std::optional<fs::path> anchors;  // T x M CSV
  fs::path out;
  std::optional<Mode> method;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_outer;
  bool force = false;
  bool timing = false;  // adds wall_seconds to result.json
};

/// Runs one fit on a bundle. Without an anchors file the assisted modes
/// anchor on the bundle's task time course (unit norm).
inline FitResult cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  const sim::SyntheticDataset ds = load_bundle(opt.data);
  SolverConfig cfg;
  if (opt.config) cfg = config::solver_from_json(storage::read_json(*opt.config), cfg);
  if (opt.method) cfg.constraints.mode = *opt.method;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.n_outer) cfg.n_outer = *opt.n_outer;

  const Index t = ds.x.time_points();
  if (cfg.constraints.mode == Mode::Blind) {
    if (opt.anchors) err << "warning: blind mode ignores the anchors file " << opt.anchors->string() << "\n";
    cfg.anchors = AnchorSet::none(t);
  } else if (opt.anchors) {
    Matrix a = storage::read_matrix(*opt.anchors);
    require(a.rows() == t, ErrorKind::DimensionMismatch,
            "anchors file " + opt.anchors->string() + " has " + std::to_string(a.rows()) +
                " rows but the data has T = " + std::to_string(t));
    cfg.anchors = AnchorSet(std::move(a));
  } else {
    cfg.anchors = experiment::unit_norm_anchor(experiment::true_task_course(ds).samples);
  }

  const FitResult res = fit(ds.x, cfg);

  prepare_out_dir(opt.out, opt.force);
  storage::write_matrix(res.dictionary.atoms(), opt.out / "dictionary.csv");
  storage::write_matrix(res.coefficients.values(), opt.out / "coefficients.csv");
  if (cfg.anchors.count() > 0) storage::write_matrix(cfg.anchors.deltas(), opt.out / "anchors.csv");

  const auto feas = is_feasible(res.dictionary);
  const auto score = eval::score_recovery(res, ds, ds.task_index);
  json result{{"config", config::solver_to_json(cfg)},
              {"history", config::history_to_json(res.history)},
              {"final",
               {{"objective", res.history.back().objective},
                {"residual", res.history.back().residual},
                {"zero_fraction", res.history.back().zero_fraction},
                {"feasible", feas.feasible},
                {"max_feasibility_excess", feas.max_excess}}},
              {"task_recovery",
               {{"matched_atom_index", score.matched_atom_index},
                {"r", score.r},
                {"one_minus_r2", score.one_minus_r_squared},
                {"degenerate", score.degenerate}}}};
  if (opt.timing) result["wall_seconds"] = res.wall_seconds;
  storage::write_json(result, opt.out / "result.json");

  out << to_string(cfg.constraints.mode) << ": objective " << res.history.back().objective
      << ", task 1-R^2 " << score.one_minus_r_squared << "\n";
  return res;
}

// ------------------------------------------------------------------ sweeps

struct SweepOptions {
  std::optional<fs::path> config;  // experiment JSON
  std::optional<fs::path> data;    // bundle; default dataset otherwise
  fs::path out;                    // curve CSV
  std::optional<std::size_t> seeds;
  std::optional<std::vector<Mode>> methods;
  bool paper_budget = false;
  bool reseed_noise = false;
  bool force = false;
  unsigned workers = 0;  // 0: one per hardware thread
};

struct Experiment {
  sim::SyntheticDataset data;
  experiment::SweepSettings settings;
  std::vector<double> axis;  // shifts in seconds or narrowing scales
};

/// Experiment JSON keys: "dataset" (bundle path or inline spec), "methods",
/// "seeds" (count or list), "shifts_s", "hrf_scales", "solver", "workers",
/// "reseed_noise". Command-line options override the file.
inline Experiment load_experiment(const SweepOptions& opt, bool shift_axis) {
  json j = json::object();
  if (opt.config) j = storage::read_json(*opt.config);
  const fs::path base = opt.config ? opt.config->parent_path() : fs::path{};

  std::optional<sim::SyntheticDataset> data;
  if (opt.data) {
    data = load_bundle(*opt.data);
  } else if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    if (d.is_string()) {
      fs::path p = d.get<std::string>();
      data = load_bundle(p.is_absolute() ? p : base / p);
    } else {
      data = sim::generate(config::dataset_spec_from_json(d));
    }
  } else {
    data = sim::generate(sim::default_dataset_spec());
  }

  experiment::SweepSettings set;
  set.solver = opt.paper_budget ? experiment::paper_solver() : experiment::desk_solver();
  if (j.contains("solver")) set.solver = config::solver_from_json(j.at("solver"), set.solver);

  if (opt.methods) {
    set.methods = *opt.methods;
  } else if (j.contains("methods")) {
    set.methods.clear();
    for (const auto& m : j.at("methods")) set.methods.push_back(mode_from_string(m.get<std::string>()));
  }

  set.seeds = experiment::default_seeds(20);
  if (opt.seeds) {
    set.seeds = experiment::default_seeds(*opt.seeds);
  } else if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    set.seeds = s.is_array() ? s.get<std::vector<std::uint64_t>>()
                             : experiment::default_seeds(s.get<std::size_t>());
  }

  set.workers = opt.workers > 0 ? opt.workers : config::get_or(j, "workers", 0u);
  if (set.workers == 0) set.workers = std::max(1u, std::thread::hardware_concurrency());
  set.reseed_noise = opt.reseed_noise || config::get_or(j, "reseed_noise", false);

  std::vector<double> axis = shift_axis
                                 ? config::get_or(j, "shifts_s", experiment::default_shifts())
                                 : config::get_or(j, "hrf_scales", experiment::default_hrf_scales());
  return Experiment{std::move(*data), std::move(set), std::move(axis)};
}

inline std::vector<experiment::CurvePoint> finish_sweep(const std::vector<experiment::CurvePoint>& curve,
                                                        const std::string& x_name,
                                                        const SweepOptions& opt, std::ostream& out) {
  const std::string csv = experiment::curve_csv(curve, x_name);
  storage::write_text(opt.out, csv);
  out << csv;
  return curve;
}

/// Shift sweep. Every shift is checked against the sample grid before any fit.
inline std::vector<experiment::CurvePoint> cmd_sweep_shift(const SweepOptions& opt, std::ostream& out) {
  Experiment e = load_experiment(opt, true);
  const auto anchors = experiment::shift_anchors(e.data, e.axis);
  prepare_out_file(opt.out, opt.force);
  return finish_sweep(experiment::run_sweep(e.data, e.axis, anchors, e.settings),
                      "shift_seconds", opt, out);
}

inline std::vector<experiment::CurvePoint> cmd_sweep_hrf(const SweepOptions& opt, std::ostream& out) {
  Experiment e = load_experiment(opt, false);
  const auto a = experiment::hrf_anchors(e.data, e.axis);
  prepare_out_file(opt.out, opt.force);
  return finish_sweep(experiment::run_sweep(e.data, a.r_squared, a.anchors, e.settings), "hrf_r2",
                      opt, out);
}

}  // namespace aadl::cli
