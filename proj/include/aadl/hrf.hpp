#pragma once

// Double-gamma hemodynamic response, event convolution into task time
// courses, and the two perturbations used by the robustness sweeps
// (integer-sample time shifts and uniform time-axis compression).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aadl/model.hpp"
#include "aadl/stats.hpp"

namespace aadl::hrf {

struct HrfParams {
  double peak_delay = 6.0;
  double undershoot_delay = 16.0;
  double peak_dispersion = 1.0;
  double undershoot_dispersion = 1.0;
  double undershoot_ratio = 1.0 / 6.0;
  double duration = 32.0;

  void validate() const {
    for (double v : {peak_delay, undershoot_delay, peak_dispersion,
                     undershoot_dispersion, undershoot_ratio, duration})
      require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidArgument,
              "HRF parameters must be finite and > 0");
    require(peak_delay < undershoot_delay, ErrorKind::InvalidArgument,
            "HRF peak_delay must be < undershoot_delay");
  }

  bool operator==(const HrfParams&) const = default;
};

struct EventSequence {
  std::vector<double> onsets;     // seconds
  std::vector<double> durations;  // seconds; 0 means a single-sample impulse
  double total_time = 0.0;        // seconds
  double tr = 2.0;                // seconds

  Index samples() const {
    return static_cast<Index>(std::llround(total_time / tr));
  }

  void validate() const {
    require(tr > 0.0 && std::isfinite(tr), ErrorKind::InvalidArgument, "tr must be > 0");
    require(total_time > 0.0, ErrorKind::InvalidArgument, "total_time must be > 0");
    require(onsets.size() == durations.size(), ErrorKind::InvalidArgument,
            "event onsets and durations differ in length");
    for (std::size_t i = 0; i < onsets.size(); ++i) {
      require(onsets[i] >= 0.0 && durations[i] >= 0.0, ErrorKind::InvalidArgument,
              "event onsets and durations must be >= 0");
      require(onsets[i] + durations[i] <= total_time + 1e-9,
              ErrorKind::InvalidArgument,
              "event " + std::to_string(i) + " ends after total_time");
      if (i > 0)
        require(onsets[i] >= onsets[i - 1], ErrorKind::InvalidArgument,
                "event onsets must be sorted ascending");
    }
  }
};

struct TimeCourse {
  Vector samples;
  double tr = 2.0;
};

/// Gamma density with the given shape and scale; 0 for t <= 0.
inline double gamma_density(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t / scale - std::lgamma(shape) -
                  shape * std::log(scale));
}

/// Unnormalized double-gamma response at time t (seconds).
inline double double_gamma(double t, const HrfParams& p) {
  return gamma_density(t, p.peak_delay / p.peak_dispersion, p.peak_dispersion) -
         p.undershoot_ratio *
             gamma_density(t, p.undershoot_delay / p.undershoot_dispersion,
                           p.undershoot_dispersion);
}

/// Samples the response at k * tr for k = 0..ceil(duration / tr), scaled to a
/// unit maximum.
inline TimeCourse canonical_hrf(const HrfParams& p, double tr) {
  p.validate();
  require(tr > 0.0 && std::isfinite(tr), ErrorKind::InvalidArgument, "tr must be > 0");
  const auto last = static_cast<Index>(std::ceil(p.duration / tr - 1e-9));
  Vector h(last + 1);
  for (Index k = 0; k <= last; ++k) h(k) = double_gamma(static_cast<double>(k) * tr, p);
  const double peak = h.maxCoeff();
  require(peak > 0.0, ErrorKind::NumericalFailure,
          "HRF has no positive lobe on this sampling grid");
  return TimeCourse{h / peak, tr};
}

/// 0/1 indicator of "task on" at each sample time k * tr.
inline Vector event_boxcar(const EventSequence& ev) {
  ev.validate();
  const Index n = ev.samples();
  Vector u = Vector::Zero(n);
  constexpr double eps = 1e-9;
  for (std::size_t e = 0; e < ev.onsets.size(); ++e) {
    const double on = ev.onsets[e];
    const double off = on + ev.durations[e];
    if (ev.durations[e] <= 0.0) {
      const auto k = static_cast<Index>(std::llround(on / ev.tr));
      if (k < n) u(k) = 1.0;
      continue;
    }
    for (Index k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * ev.tr;
      if (t >= on - eps && t < off - eps) u(k) = 1.0;
    }
  }
  return u;
}

/// y[n] = sum_k u[k] h[n - k] for n < length.
inline Vector convolve_truncated(const Vector& u, const Vector& h, Index length) {
  Vector y = Vector::Zero(length);
  for (Index k = 0; k < std::min(length, u.size()); ++k) {
    if (u(k) == 0.0) continue;
    for (Index j = 0; j < h.size() && k + j < length; ++j) y(k + j) += u(k) * h(j);
  }
  return y;
}

inline Vector unit_max_abs(Vector v) {
  const double m = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (m > 0.0) v /= m;
  return v;
}

inline TimeCourse convolve_events(const EventSequence& ev, const TimeCourse& h) {
  require(std::abs(ev.tr - h.tr) <= 1e-12 * std::max(1.0, ev.tr),
          ErrorKind::InvalidArgument,
          "event TR " + std::to_string(ev.tr) + " differs from HRF TR " +
              std::to_string(h.tr));
  const Vector u = event_boxcar(ev);
  return TimeCourse{unit_max_abs(convolve_truncated(u, h.samples, u.size())), ev.tr};
}

/// Moves samples later by shift_seconds (earlier when negative); vacated
/// samples are zero. Only whole-sample shifts are accepted.
inline TimeCourse shift_time_course(const TimeCourse& tc, double shift_seconds) {
  const double steps = shift_seconds / tc.tr;
  const double rounded = std::round(steps);
  require(std::abs(steps - rounded) <= 1e-9, ErrorKind::InvalidArgument,
          "shift of " + std::to_string(shift_seconds) +
              " s is not on the sample grid; use a multiple of TR = " +
              std::to_string(tc.tr) + " s");
  const auto k = static_cast<Index>(rounded);
  const Index n = tc.samples.size();
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index src = i - k;
    if (src >= 0 && src < n) out(i) = tc.samples(src);
  }
  return TimeCourse{std::move(out), tc.tr};
}

/// Uniform time-axis compression of the response by `scale` in (0, 1].
inline HrfParams narrowed(const HrfParams& base, double scale) {
  require(scale > 0.0 && scale <= 1.0, ErrorKind::InvalidArgument,
          "HRF narrowing scale must lie in (0, 1], got " + std::to_string(scale));
  HrfParams p = base;
  p.peak_delay *= scale;
  p.undershoot_delay *= scale;
  p.peak_dispersion *= scale;
  p.undershoot_dispersion *= scale;
  return p;
}

struct NarrowedHrf {
  double scale = 1.0;
  HrfParams params;
  TimeCourse response;
  double r_squared = 1.0;  // squared correlation against the base response
};

inline std::vector<NarrowedHrf> narrowed_hrf_family(const HrfParams& base,
                                                    const std::vector<double>& scales,
                                                    double tr) {
  require(!scales.empty(), ErrorKind::InvalidArgument, "empty narrowing scale list");
  for (std::size_t i = 1; i < scales.size(); ++i)
    require(scales[i] < scales[i - 1], ErrorKind::InvalidArgument,
            "narrowing scales must be strictly descending");
  const TimeCourse ref = canonical_hrf(base, tr);

  std::vector<NarrowedHrf> family;
  family.reserve(scales.size());
  for (double w : scales) {
    NarrowedHrf m;
    m.scale = w;
    m.params = narrowed(base, w);
    m.response = canonical_hrf(m.params, tr);
    const double r = w == 1.0 ? 1.0 : pearson_r(m.response.samples, ref.samples);
    m.r_squared = r * r;
    if (!family.empty())
      require(m.r_squared < family.back().r_squared, ErrorKind::NumericalFailure,
              "narrowed HRF r^2 is not decreasing at scale " + std::to_string(w));
    family.push_back(std::move(m));
  }
  return family;
}

}  // namespace aadl::hrf
