#include <bubblelink/metrics.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bubblelink;

namespace {

// Injections whose midpoints are the given times.
InjectionSchedule truth_at(const std::vector<double>& mids, double duration = 0.3) {
  InjectionSchedule s;
  for (double m : mids) s.events.push_back({m - duration / 2.0, duration, 1.0});
  s.total_span = mids.empty() ? 0.0 : mids.back() + duration;
  return s;
}

PeakSet peaks_at(const std::vector<double>& times) {
  PeakSet p;
  for (double t : times) p.peaks.push_back({t, 1.0});
  return p;
}

MatchResult counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  MatchResult m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  return m;
}

}  // namespace

TEST(MatchPeaks, PerfectDetection) {
  const std::vector<double> mids{0.15, 4.75, 7.05};
  const auto m = match_peaks(peaks_at(mids), truth_at(mids), 1.0);
  EXPECT_EQ(m.tp, 3u);
  EXPECT_EQ(m.fp, 0u);
  EXPECT_EQ(m.fn, 0u);
}

TEST(MatchPeaks, OutOfWindowDetectionIsFalsePositive) {
  const auto m = match_peaks(peaks_at({1.1, 3.0, 5.05}), truth_at({1.0, 5.0}), 0.5);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 0u);
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_NEAR(m.pairs[0].detected_time, 1.1, 1e-12);
  EXPECT_NEAR(m.pairs[1].detected_time, 5.05, 1e-12);
}

TEST(MatchPeaks, MissedInjection) {
  const auto m = match_peaks(PeakSet{}, truth_at({1.0}), 1.0);
  EXPECT_EQ(m.tp, 0u);
  EXPECT_EQ(m.fp, 0u);
  EXPECT_EQ(m.fn, 1u);
}

TEST(MatchPeaks, NearestThenEarlier) {
  auto m = match_peaks(peaks_at({0.6, 1.2}), truth_at({1.0}), 1.0);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_NEAR(m.pairs[0].detected_time, 1.2, 1e-12);
  m = match_peaks(peaks_at({0.75, 1.25}), truth_at({1.0}), 1.0);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_NEAR(m.pairs[0].detected_time, 0.75, 1e-12);
}

TEST(MatchPeaks, RejectsNonPositiveTolerance) {
  EXPECT_THROW(match_peaks(PeakSet{}, InjectionSchedule{}, 0.0), ConfigError);
}

TEST(MatchPeaks, ConservationAndPairTolerance) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> mids;
    double t = 0.5;
    const std::size_t n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      t += 0.4 + u(rng) / 20.0;
      mids.push_back(t);
    }
    std::vector<double> det;
    for (std::size_t i = 0, k = rng() % 40; i < k; ++i) det.push_back(u(rng));
    std::sort(det.begin(), det.end());
    const double tol = 0.1 + u(rng) / 100.0;
    const auto m = match_peaks(peaks_at(det), truth_at(mids), tol);
    EXPECT_EQ(m.tp, m.pairs.size());
    EXPECT_EQ(m.tp + m.fn, mids.size());
    EXPECT_EQ(m.tp + m.fp, det.size());
    for (const auto& pr : m.pairs) EXPECT_LE(std::abs(pr.truth_time - pr.detected_time), tol);
  }
}

TEST(MatchPeaks, GreedyIsMaximumWhenTruthIsWellSeparated) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double tol = 0.2 + u(rng);
    std::vector<double> mids;
    double t = 0.0;
    for (std::size_t i = 0, n = 1 + rng() % 8; i < n; ++i) {
      t += 2.0 * tol + 2.0 * u(rng);
      mids.push_back(t);
    }
    std::vector<double> det;
    for (std::size_t i = 0, k = rng() % 9; i < k; ++i) det.push_back(u(rng) * (t + 2.0));
    std::sort(det.begin(), det.end());
    det.erase(std::unique(det.begin(), det.end()), det.end());
    const auto m = match_peaks(peaks_at(det), truth_at(mids), tol);
    // Truth times as the matcher sees them (start + duration / 2).
    std::vector<double> seen;
    for (const auto& e : truth_at(mids).events) seen.push_back(e.midpoint());
    EXPECT_EQ(m.tp, oracle::max_matching(seen, det, tol)) << "trial " << trial;
  }
}

TEST(MatchPeaks, Monotonicity) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> mids;
    for (int i = 0; i < 10; ++i) mids.push_back(1.0 + 2.3 * i);
    std::vector<double> det;
    for (int i = 0; i < 12; ++i) det.push_back(u(rng));
    std::sort(det.begin(), det.end());
    const auto base = match_peaks(peaks_at(det), truth_at(mids), 1.0);

    auto more = det;
    more.push_back(u(rng));
    std::sort(more.begin(), more.end());
    EXPECT_GE(match_peaks(peaks_at(more), truth_at(mids), 1.0).fp, base.fp);

    if (!base.pairs.empty()) {
      // Drop the detection of one matched pair.
      auto fewer = det;
      fewer.erase(std::find(fewer.begin(), fewer.end(), base.pairs.front().detected_time));
      EXPECT_GE(match_peaks(peaks_at(fewer), truth_at(mids), 1.0).fn, base.fn);
    }
  }
}

TEST(F1, Examples) {
  auto s = f1_score(counts(8, 1, 1));
  EXPECT_DOUBLE_EQ(s.precision, 8.0 / 9.0);
  EXPECT_DOUBLE_EQ(s.recall, 8.0 / 9.0);
  EXPECT_NEAR(s.f1, 0.8889, 1e-4);
  s = f1_score(counts(0, 0, 0));
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  s = f1_score(counts(5, 0, 0));
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(F1, RangeAndPerfection) {
  for (std::size_t tp = 0; tp < 12; ++tp) {
    for (std::size_t fp = 0; fp < 12; ++fp) {
      for (std::size_t fn = 0; fn < 12; ++fn) {
        const auto s = f1_score(counts(tp, fp, fn));
        EXPECT_GE(s.f1, 0.0);
        EXPECT_LE(s.f1, 1.0);
        EXPECT_EQ(s.f1 == 1.0, tp > 0 && fp == 0 && fn == 0);
        if (tp == 0) {
          EXPECT_EQ(s.f1, 0.0);
        }
      }
    }
  }
}

TEST(Ber, Examples) {
  EXPECT_EQ(ber(counts(10, 0, 0), 10), 0.0);
  EXPECT_DOUBLE_EQ(ber(counts(8, 1, 2), 10), 0.3);
  EXPECT_THROW(ber(counts(0, 3, 0), 0), UndefinedMetricError);
  // Unclamped when errors outnumber injections.
  EXPECT_DOUBLE_EQ(ber(counts(1, 20, 1), 2), 10.5);
}

TEST(Bsr, ComplementsPrintedTable) {
  EXPECT_NEAR(bsr(0.1179), 0.8821, 1e-4);
  EXPECT_NEAR(bsr(0.1393), 0.8607, 1e-4);
  EXPECT_NEAR(bsr(0.7679), 0.2321, 1e-4);
  EXPECT_EQ(bsr(0.0), 1.0);
  EXPECT_THROW(bsr(-0.1), ConfigError);
}

TEST(Bsr, SumsToOneExactly) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t total = 1 + rng() % 200;
    const double b = ber(counts(0, rng() % 300, rng() % 300), total);
    EXPECT_EQ(b + bsr(b), 1.0) << b;
  }
}

TEST(Evaluate, FillsReport) {
  const auto r = evaluate(peaks_at({1.1, 3.0, 5.05}), truth_at({1.0, 5.0}), 0.5, 5);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 0u);
  EXPECT_EQ(r.peaks_total, 2u);
  EXPECT_DOUBLE_EQ(r.ber, 0.5);
  EXPECT_EQ(r.ber + r.bsr, 1.0);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.bits_sent, 5u);
  EXPECT_DOUBLE_EQ(r.ber_bits_sent, 0.2);
  EXPECT_THROW(evaluate(PeakSet{}, InjectionSchedule{}, 1.0), UndefinedMetricError);
}
