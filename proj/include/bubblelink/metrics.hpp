#pragma once

#include <bubblelink/error.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bubblelink {

struct MatchPair {
  double truth_time = 0.0;
  double detected_time = 0.0;

  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> pairs;
};

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ber = 0.0;  // (fp + fn) / peaks_total, unclamped
  double bsr = 1.0;
  std::size_t peaks_total = 0;
  // Same error count over every transmitted bit, zeros included. Zero when
  // the sent bit count is unknown.
  std::size_t bits_sent = 0;
  double ber_bits_sent = 0.0;
};

// Greedy alignment of detections to injections. Each injection is observed
// at its midpoint; injections are visited in time order and take the
// nearest still-free detection within +-tolerance (earlier one on ties).
inline MatchResult match_peaks(const PeakSet& detected, const InjectionSchedule& truth,
                               double tolerance) {
  if (!(tolerance > 0.0)) throw ConfigError("match_peaks: tolerance must be > 0");

  std::vector<double> truth_times;
  truth_times.reserve(truth.events.size());
  for (const auto& e : truth.events) truth_times.push_back(e.midpoint());
  std::sort(truth_times.begin(), truth_times.end());

  std::vector<bool> used(detected.size(), false);
  MatchResult m;
  for (double t : truth_times) {
    std::size_t best = detected.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < detected.size(); ++j) {
      if (used[j]) continue;
      const double gap = std::abs(detected.peaks[j].time - t);
      if (gap > tolerance) continue;
      const bool earlier_tie =
          gap == best_gap && detected.peaks[j].time < detected.peaks[best].time;
      if (gap < best_gap || earlier_tie) {
        best = j;
        best_gap = gap;
      }
    }
    if (best < detected.size()) {
      used[best] = true;
      m.pairs.push_back({t, detected.peaks[best].time});
    }
  }
  m.tp = m.pairs.size();
  m.fn = truth_times.size() - m.tp;
  m.fp = detected.size() - m.tp;
  return m;
}

inline F1Score f1_score(const MatchResult& m) {
  F1Score s;
  const auto tp = static_cast<double>(m.tp);
  if (m.tp + m.fp > 0) s.precision = tp / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0) s.recall = tp / static_cast<double>(m.tp + m.fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

inline double ber(const MatchResult& m, std::size_t peaks_total) {
  if (peaks_total == 0) {
    throw UndefinedMetricError("ber: no transmitted peaks, bit error rate is undefined");
  }
  return static_cast<double>(m.fp + m.fn) / static_cast<double>(peaks_total);
}

inline double bsr(double ber_value) {
  if (!(ber_value >= 0.0)) throw ConfigError("bsr: ber must be >= 0");
  return 1.0 - ber_value;
}

// Full report for one detection run. peaks_total is the number of
// transmitted 1-bits (ground-truth injections).
inline MetricsReport evaluate(const PeakSet& detected, const InjectionSchedule& truth,
                              double tolerance, std::size_t bits_sent = 0) {
  const auto m = match_peaks(detected, truth, tolerance);
  const auto s = f1_score(m);
  MetricsReport r;
  r.tp = m.tp;
  r.fp = m.fp;
  r.fn = m.fn;
  r.precision = s.precision;
  r.recall = s.recall;
  r.f1 = s.f1;
  r.peaks_total = truth.events.size();
  r.ber = ber(m, r.peaks_total);
  r.bsr = bsr(r.ber);
  r.bits_sent = bits_sent;
  if (bits_sent > 0) {
    r.ber_bits_sent = static_cast<double>(m.fp + m.fn) / static_cast<double>(bits_sent);
  }
  return r;
}

}  // namespace bubblelink
