#pragma once

// JSON (de)serialization of dataset specs, solver settings and fit results.
// Missing keys fall back to the library defaults; unknown keys are ignored.

#include <string>
#include <vector>

#include "json.hpp"

#include "aadl/hrf.hpp"
#include "aadl/simgen.hpp"
#include "aadl/solver.hpp"

namespace aadl::config {

using json = nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config key '") + key + "': " + e.what());
  }
}

inline json hrf_to_json(const hrf::HrfParams& p, double tr) {
  return json{{"peak_delay", p.peak_delay},
              {"undershoot_delay", p.undershoot_delay},
              {"peak_dispersion", p.peak_dispersion},
              {"undershoot_dispersion", p.undershoot_dispersion},
              {"undershoot_ratio", p.undershoot_ratio},
              {"duration_s", p.duration},
              {"tr_s", tr}};
}

inline hrf::HrfParams hrf_from_json(const json& j, hrf::HrfParams p = {}) {
  p.peak_delay = get_or(j, "peak_delay", p.peak_delay);
  p.undershoot_delay = get_or(j, "undershoot_delay", p.undershoot_delay);
  p.peak_dispersion = get_or(j, "peak_dispersion", p.peak_dispersion);
  p.undershoot_dispersion = get_or(j, "undershoot_dispersion", p.undershoot_dispersion);
  p.undershoot_ratio = get_or(j, "undershoot_ratio", p.undershoot_ratio);
  p.duration = get_or(j, "duration_s", p.duration);
  return p;
}

inline json events_to_json(const hrf::EventSequence& ev) {
  return json{{"onsets_s", ev.onsets},
              {"durations_s", ev.durations},
              {"total_time_s", ev.total_time},
              {"tr_s", ev.tr}};
}

inline hrf::EventSequence events_from_json(const json& j, double total, double tr) {
  hrf::EventSequence ev;
  ev.onsets = get_or(j, "onsets_s", std::vector<double>{});
  ev.durations = get_or(j, "durations_s", std::vector<double>(ev.onsets.size(), 0.0));
  ev.total_time = get_or(j, "total_time_s", total);
  ev.tr = get_or(j, "tr_s", tr);
  return ev;
}

inline json source_to_json(const sim::SourceSpec& s) {
  json blobs = json::array();
  for (const auto& b : s.blobs)
    blobs.push_back({{"center_x", b.center_x},
                     {"center_y", b.center_y},
                     {"sigma", b.sigma},
                     {"amplitude", b.amplitude}});
  json j{{"role", sim::to_string(s.role)}, {"blobs", blobs}, {"energy", s.energy}};
  if (!sim::is_artifact(s.role)) j["events"] = events_to_json(s.events);
  return j;
}

inline sim::SourceSpec source_from_json(const json& j, double total, double tr) {
  sim::SourceSpec s;
  s.role = sim::role_from_string(get_or<std::string>(j, "role", "physiological"));
  s.energy = get_or(j, "energy", 1.0);
  if (j.contains("blobs"))
    for (const auto& b : j.at("blobs"))
      s.blobs.push_back({get_or(b, "center_x", 0.0), get_or(b, "center_y", 0.0),
                         get_or(b, "sigma", 1.0), get_or(b, "amplitude", 1.0)});
  if (j.contains("events")) s.events = events_from_json(j.at("events"), total, tr);
  return s;
}

inline json dataset_spec_to_json(const sim::DatasetSpec& spec) {
  json sources = json::array();
  for (const auto& s : spec.sources) sources.push_back(source_to_json(s));
  return json{{"grid", {{"width", spec.grid.width}, {"height", spec.grid.height}}},
              {"t", spec.t},
              {"tr_s", spec.tr},
              {"noise_sigma", spec.noise_sigma},
              {"seed", spec.seed},
              {"hrf", hrf_to_json(spec.true_hrf, spec.tr)},
              {"sources", std::move(sources)}};
}

/// Parses a dataset spec. Without a "sources" array the default 20-source
/// layout is used; top-level keys override the defaults either way.
inline sim::DatasetSpec dataset_spec_from_json(const json& j) {
  sim::DatasetSpec spec = sim::default_dataset_spec(get_or<std::uint64_t>(j, "seed", sim::default_dataset_spec().seed));
  if (j.contains("grid")) {
    spec.grid.width = get_or(j.at("grid"), "width", spec.grid.width);
    spec.grid.height = get_or(j.at("grid"), "height", spec.grid.height);
  }
  spec.t = get_or<Index>(j, "t", spec.t);
  spec.tr = get_or(j, "tr_s", spec.tr);
  spec.noise_sigma = get_or(j, "noise_sigma", spec.noise_sigma);
  if (j.contains("hrf")) {
    const json& h = j.at("hrf");
    spec.true_hrf = hrf_from_json(h, spec.true_hrf);
    if (h.contains("tr_s"))
      require(std::abs(h.at("tr_s").get<double>() - spec.tr) <= 1e-12,
              ErrorKind::InvalidArgument, "hrf.tr_s disagrees with dataset tr_s");
  }
  if (j.contains("sources")) {
    spec.sources.clear();
    const double total = static_cast<double>(spec.t) * spec.tr;
    for (const auto& s : j.at("sources")) spec.sources.push_back(source_from_json(s, total, spec.tr));
  }
  return spec;
}

/// Solver settings without the anchors (those travel as a CSV file).
inline json solver_to_json(const SolverConfig& c) {
  return json{{"k", c.k},
              {"lambda", c.lambda},
              {"c_delta", c.constraints.c_delta},
              {"c_d", c.constraints.c_d},
              {"method", to_string(c.constraints.mode)},
              {"n_outer", c.n_outer},
              {"n_inner_coef", c.coef_cfg.n_inner},
              {"n_inner_dict", c.dict_cfg.n_inner},
              {"c_s_safety", c.coef_cfg.c_s_safety},
              {"c_d_safety", c.dict_cfg.c_d_safety},
              {"threshold_mode", to_string(c.coef_cfg.threshold_mode)},
              {"init", to_string(c.init)},
              {"seed", c.seed},
              {"anchor_count", c.constraints.mode == Mode::Blind ? 0 : c.anchors.count()}};
}

/// Applies the keys present in `j` on top of `c`. "n_inner" sets both inner
/// budgets; "n_inner_coef" / "n_inner_dict" override it individually.
inline SolverConfig solver_from_json(const json& j, SolverConfig c) {
  c.k = get_or<Index>(j, "k", c.k);
  c.lambda = get_or(j, "lambda", c.lambda);
  c.constraints.c_delta = get_or(j, "c_delta", c.constraints.c_delta);
  c.constraints.c_d = get_or(j, "c_d", c.constraints.c_d);
  if (j.contains("method"))
    c.constraints.mode = mode_from_string(j.at("method").get<std::string>());
  c.n_outer = get_or(j, "n_outer", c.n_outer);
  const int both = get_or(j, "n_inner", -1);
  if (both > 0) c.coef_cfg.n_inner = c.dict_cfg.n_inner = both;
  c.coef_cfg.n_inner = get_or(j, "n_inner_coef", c.coef_cfg.n_inner);
  c.dict_cfg.n_inner = get_or(j, "n_inner_dict", c.dict_cfg.n_inner);
  c.coef_cfg.c_s_safety = get_or(j, "c_s_safety", c.coef_cfg.c_s_safety);
  c.dict_cfg.c_d_safety = get_or(j, "c_d_safety", c.dict_cfg.c_d_safety);
  if (j.contains("threshold_mode"))
    c.coef_cfg.threshold_mode =
        threshold_mode_from_string(j.at("threshold_mode").get<std::string>());
  if (j.contains("init")) c.init = init_mode_from_string(j.at("init").get<std::string>());
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  return c;
}

inline json history_to_json(const std::vector<IterationRecord>& h) {
  json arr = json::array();
  for (const auto& r : h)
    arr.push_back({{"objective", r.objective},
                   {"residual", r.residual},
                   {"zero_fraction", r.zero_fraction},
                   {"max_feasibility_excess", r.max_excess}});
  return arr;
}

}  // namespace aadl::config
