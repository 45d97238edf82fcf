#pragma once

#include <bubblelink/error.hpp>
#include <bubblelink/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace bubblelink {

struct MafParams {
  std::size_t window = 8;

  void validate() const {
    if (window < 1) throw ConfigError("maf: window must be >= 1");
  }
};

// Scalar random-walk Kalman smoother settings, all in amplitude units.
struct KalmanParams {
  double q = 1e-4;
  double r = 1e-2;
  double x0 = 0.0;
  double p0 = 1e-2;

  void validate() const {
    if (!(q >= 0.0)) throw ConfigError("kalman: q must be >= 0");
    if (!(r > 0.0)) throw ConfigError("kalman: r must be > 0");
    if (!(p0 >= 0.0)) throw ConfigError("kalman: p0 must be >= 0");
    if (!std::isfinite(x0)) throw ConfigError("kalman: x0 must be finite");
  }
};

struct PeakDetectParams {
  double threshold = 0.0;
  std::size_t min_distance = 25;

  void validate() const {
    if (min_distance < 1) throw ConfigError("peak: min_distance must be >= 1");
    if (!std::isfinite(threshold)) throw ConfigError("peak: threshold must be finite");
  }
};

// Causal trailing mean; the window shrinks over the first W-1 samples.
inline SensorTrace moving_average(const SensorTrace& trace, const MafParams& params) {
  params.validate();
  const auto& x = trace.samples;
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t first = n + 1 >= params.window ? n + 1 - params.window : 0;
    const auto begin = x.begin() + static_cast<std::ptrdiff_t>(first);
    const auto end = x.begin() + static_cast<std::ptrdiff_t>(n + 1);
    y[n] = std::accumulate(begin, end, 0.0) / static_cast<double>(n + 1 - first);
  }
  return trace.with_samples(std::move(y));
}

// One-state random-walk Kalman filter.
struct ScalarKalman {
  double q;
  double r;
  double x;  // state estimate
  double p;  // estimate variance

  explicit ScalarKalman(const KalmanParams& params)
      : q(params.q), r(params.r), x(params.x0), p(params.p0) {
    params.validate();
  }

  double update(double z) {
    const double p_pred = p + q;
    const double k = p_pred / (p_pred + r);
    x += k * (z - x);
    p = (1.0 - k) * p_pred;
    return x;
  }
};

inline SensorTrace kalman_filter(const SensorTrace& trace, const KalmanParams& params) {
  ScalarKalman kf(params);
  std::vector<double> y;
  y.reserve(trace.size());
  for (double z : trace.samples) y.push_back(kf.update(z));
  return trace.with_samples(std::move(y));
}

// Local maxima at or above threshold, thinned greedily: strongest first
// (earlier index on ties), dropping anything closer than min_distance
// samples to an already accepted peak. For a flat-topped maximum only its
// first sample is a candidate. Returned in time order.
inline PeakSet detect_peaks(const SensorTrace& trace, const PeakDetectParams& params) {
  params.validate();
  const auto& x = trace.samples;
  const std::size_t n = x.size();

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < params.threshold) continue;
    if (i > 0 && !(x[i] > x[i - 1])) continue;
    std::size_t j = i + 1;
    while (j < n && x[j] == x[i]) ++j;
    if (j < n && x[j] > x[i]) continue;
    candidates.push_back(i);
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  std::vector<std::size_t> accepted;
  for (auto c : candidates) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      const std::size_t gap = a > c ? a - c : c - a;
      return gap < params.min_distance;
    });
    if (clear) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end());

  PeakSet out;
  out.peaks.reserve(accepted.size());
  for (auto i : accepted) out.peaks.push_back({trace.bin_center(i), x[i]});
  return out;
}

// Percentile with linear interpolation between order statistics
// (rank = p/100 * (N-1)). Empty input yields 0.
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// Heuristic defaults derived from the sample clock and the trace itself.

inline std::size_t seconds_to_samples(double seconds, double sample_interval) {
  const auto n = std::lround(seconds / sample_interval + 1e-9);
  return static_cast<std::size_t>(std::max<long>(1, n));
}

// Window matching the 0.3 s injection length.
inline MafParams default_maf_params(double sample_interval) {
  return MafParams{seconds_to_samples(0.3, sample_interval)};
}

inline KalmanParams default_kalman_params(const SensorTrace& trace) {
  double peak = 0.0;
  for (double s : trace.samples) peak = std::max(peak, std::abs(s));
  if (!(peak > 0.0)) peak = 1.0;
  const double scale = peak * peak;
  KalmanParams p;
  p.q = 1e-4 * scale;
  p.r = 1e-2 * scale;
  p.x0 = trace.empty() ? 0.0 : trace.samples.front();
  p.p0 = p.r;
  return p;
}

struct ThresholdRule {
  double fraction = 0.5;
  double percentile = 95.0;

  double apply(const SensorTrace& trace) const {
    return fraction * bubblelink::percentile(trace.samples, percentile);
  }
};

inline PeakDetectParams default_peak_params(const SensorTrace& trace,
                                            const ThresholdRule& rule = {}) {
  return PeakDetectParams{rule.apply(trace), seconds_to_samples(1.0, trace.sample_interval)};
}

}  // namespace bubblelink
