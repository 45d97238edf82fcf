#pragma once

#include <bubblelink/error.hpp>
#include <bubblelink/trace.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bubblelink {

// How bit durations are laid out on the time axis.
//  - FramedSymbol: every bit owns a fixed frame of t_on + t_off seconds; a 1
//    injects for t_on at the frame start, a 0 stays idle.
//  - VariableLength: a 1 lasts t_on, a 0 lasts t_off, back to back.
enum class TimingMode { FramedSymbol, VariableLength };

struct TimingParams {
  double t_on = 0.3;
  double t_off = 2.0;
  TimingMode mode = TimingMode::FramedSymbol;

  double symbol_duration() const { return t_on + t_off; }

  void validate() const {
    if (!(t_on > 0.0) || !std::isfinite(t_on)) {
      throw ConfigError("timing: t_on must be > 0 (got " + std::to_string(t_on) + ")");
    }
    if (!(t_off > 0.0) || !std::isfinite(t_off)) {
      throw ConfigError("timing: t_off must be > 0 (got " + std::to_string(t_off) + ")");
    }
    if (t_off < t_on) {
      throw ConfigError("timing: t_off must be >= t_on (got t_on=" + std::to_string(t_on) +
                        ", t_off=" + std::to_string(t_off) + ")");
    }
  }
};

struct BitSequence {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }

  std::size_t count_ones() const {
    std::size_t n = 0;
    for (auto b : bits) n += (b == 1);
    return n;
  }

  void validate() const {
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] > 1) {
        throw InvariantError("bits: element " + std::to_string(i) + " is not 0 or 1");
      }
    }
  }

  bool operator==(const BitSequence&) const = default;
};

struct InjectionEvent {
  double start = 0.0;
  double duration = 0.0;
  double dose = 1.0;

  double midpoint() const { return start + duration / 2.0; }

  bool operator==(const InjectionEvent&) const = default;
};

struct InjectionSchedule {
  std::vector<InjectionEvent> events;
  double total_span = 0.0;

  // Sorted strictly ascending, non-overlapping, positive dose and duration.
  void validate() const {
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (!std::isfinite(e.start) || !std::isfinite(e.duration) || !std::isfinite(e.dose)) {
        throw InvariantError("schedule: event " + std::to_string(i) + " has a non-finite field");
      }
      if (!(e.duration > 0.0)) {
        throw InvariantError("schedule: event " + std::to_string(i) + " duration must be > 0");
      }
      if (!(e.dose > 0.0)) {
        throw InvariantError("schedule: event " + std::to_string(i) + " dose must be > 0");
      }
      if (i > 0) {
        const auto& prev = events[i - 1];
        if (!(e.start > prev.start)) {
          throw InvariantError("schedule: event " + std::to_string(i) +
                               " start is not strictly ascending");
        }
        if (prev.start + prev.duration > e.start) {
          throw InvariantError("schedule: event " + std::to_string(i) +
                               " overlaps the previous event");
        }
      }
    }
    if (total_span < 0.0 || !std::isfinite(total_span)) {
      throw InvariantError("schedule: total_span must be finite and >= 0");
    }
  }

  bool operator==(const InjectionSchedule&) const = default;
};

inline InjectionSchedule encode(const BitSequence& bits, const TimingParams& timing,
                                double dose = 1.0) {
  timing.validate();
  bits.validate();
  if (!(dose > 0.0) || !std::isfinite(dose)) {
    throw ConfigError("encode: dose must be > 0");
  }

  InjectionSchedule out;
  if (timing.mode == TimingMode::FramedSymbol) {
    const double t_sym = timing.symbol_duration();
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits.bits[i] == 1) {
        out.events.push_back({static_cast<double>(i) * t_sym, timing.t_on, dose});
      }
    }
    out.total_span = static_cast<double>(bits.size()) * t_sym;
  } else {
    double cursor = 0.0;
    for (auto b : bits.bits) {
      if (b == 1) {
        out.events.push_back({cursor, timing.t_on, dose});
        cursor += timing.t_on;
      } else {
        cursor += timing.t_off;
      }
    }
    out.total_span = cursor;
  }
  return out;
}

// Closed-form rate accounting for the OOK clock.

inline double raw_bit_rate(const TimingParams& timing) {
  timing.validate();
  return 1.0 / timing.symbol_duration();
}

inline double time_overhead(const TimingParams& timing) {
  timing.validate();
  return timing.t_off / timing.symbol_duration();
}

// Mean bit duration when 0s and 1s are equally likely.
inline double uniform_avg_bit_duration(const TimingParams& timing) {
  timing.validate();
  return (timing.t_on + timing.t_off) / 2.0;
}

inline double effective_bit_rate(const TimingParams& timing) {
  return 1.0 / uniform_avg_bit_duration(timing);
}

// Fraction of the mean bit duration spent injecting.
inline double duty_efficiency(const TimingParams& timing) {
  return timing.t_on / uniform_avg_bit_duration(timing);
}

// Ceiling imposed by a sensor that needs `min_intervals` bins per symbol.
inline double max_channel_bit_rate(double sample_interval, int min_intervals) {
  if (!(sample_interval > 0.0)) {
    throw ConfigError("max_channel_bit_rate: sample_interval must be > 0");
  }
  if (min_intervals < 1) {
    throw ConfigError("max_channel_bit_rate: min_intervals must be >= 1");
  }
  return 1.0 / (static_cast<double>(min_intervals) * sample_interval);
}

// Receiver side of FramedSymbol encoding. Frame i is nominally observed at
// delay + i*T_sym + t_on/2; any peak within +-window of that instant makes
// bit i a 1.
inline BitSequence decode(const PeakSet& peaks, const TimingParams& timing, double delay,
                          std::size_t n_bits, double window) {
  timing.validate();
  if (timing.mode != TimingMode::FramedSymbol) {
    throw UnsupportedModeError("decode: only FramedSymbol timing can be decoded");
  }
  const double t_sym = timing.symbol_duration();
  if (!(window >= 0.0) || window > t_sym / 2.0) {
    throw ConfigError("decode: window must lie in [0, T_sym/2] (got " + std::to_string(window) +
                      ")");
  }
  if (!(delay >= 0.0) || !std::isfinite(delay)) {
    throw ConfigError("decode: delay must be >= 0");
  }

  BitSequence out;
  out.bits.assign(n_bits, 0);
  for (const auto& p : peaks.peaks) {
    // Only the nearest frame centre can be within window <= T_sym/2, but a
    // peak exactly between two centres may touch both.
    const double rel = (p.time - delay - timing.t_on / 2.0) / t_sym;
    const auto lo = static_cast<long long>(std::floor(rel));
    for (long long i = lo; i <= lo + 1; ++i) {
      if (i < 0 || static_cast<std::size_t>(i) >= n_bits) continue;
      const double centre = delay + static_cast<double>(i) * t_sym + timing.t_on / 2.0;
      if (std::abs(p.time - centre) <= window) out.bits[static_cast<std::size_t>(i)] = 1;
    }
  }
  return out;
}

}  // namespace bubblelink
