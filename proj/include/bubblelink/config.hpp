#pragma once

// Experiment configuration: a flat key=value file with dotted section keys,
// e.g. `channel.flow_rate=1.24`. Keys left out keep their defaults; the
// filter and detector settings marked optional fall back to values derived
// from the trace being processed.

#include <bubblelink/channel.hpp>
#include <bubblelink/dsp.hpp>
#include <bubblelink/error.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/trace_io.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace bubblelink {

// Trace-derived Kalman defaults with any explicit overrides applied. An
// explicit r without p0 also sets p0 = r.
inline KalmanParams resolve_kalman_params(const SensorTrace& trace, std::optional<double> q,
                                          std::optional<double> r, std::optional<double> x0,
                                          std::optional<double> p0) {
  auto p = default_kalman_params(trace);
  if (q) p.q = *q;
  if (r) {
    p.r = *r;
    p.p0 = *r;
  }
  if (x0) p.x0 = *x0;
  if (p0) p.p0 = *p0;
  return p;
}

struct ExperimentConfig {
  TimingParams timing;
  ChannelParams channel;
  double dose = 1.0;

  std::optional<std::size_t> maf_window;
  std::optional<double> kalman_q;
  std::optional<double> kalman_r;
  std::optional<double> kalman_x0;
  std::optional<double> kalman_p0;

  std::optional<double> peak_threshold;
  std::optional<std::size_t> peak_min_distance;
  ThresholdRule threshold_rule;

  double tolerance = 1.0;
  double decode_window = 1.0;

  // Either an explicit payload or `random_length` bits drawn from bits_seed.
  std::optional<BitSequence> payload;
  std::size_t random_length = 32;
  std::uint64_t bits_seed = 1;
  std::size_t preamble = 1;

  void validate() const {
    timing.validate();
    channel.validate();
    if (!(dose > 0.0)) throw ConfigError("config: dose must be > 0");
    if (maf_window && *maf_window < 1) throw ConfigError("config: maf.window must be >= 1");
    if (kalman_q && !(*kalman_q >= 0.0)) throw ConfigError("config: kalman.q must be >= 0");
    if (kalman_r && !(*kalman_r > 0.0)) throw ConfigError("config: kalman.r must be > 0");
    if (kalman_p0 && !(*kalman_p0 >= 0.0)) throw ConfigError("config: kalman.p0 must be >= 0");
    if (peak_min_distance && *peak_min_distance < 1) {
      throw ConfigError("config: peak.min_distance must be >= 1");
    }
    if (!(threshold_rule.percentile >= 0.0 && threshold_rule.percentile <= 100.0)) {
      throw ConfigError("config: peak.threshold_percentile must lie in [0, 100]");
    }
    if (!(tolerance > 0.0)) throw ConfigError("config: eval.tolerance must be > 0");
    if (!(decode_window >= 0.0) || decode_window > timing.symbol_duration() / 2.0) {
      throw ConfigError("config: decode.window must lie in [0, T_sym/2]");
    }
    if (timing.mode != TimingMode::FramedSymbol) {
      throw ConfigError("config: the pipeline decodes, which needs timing.mode=framed");
    }
    if (preamble < 1) throw ConfigError("config: bits.preamble must be >= 1 for delay estimation");
    if (payload) payload->validate();
  }

  // Preamble 1s followed by the payload.
  BitSequence transmitted_bits() const {
    BitSequence out;
    out.bits.assign(preamble, 1);
    if (payload) {
      out.bits.insert(out.bits.end(), payload->bits.begin(), payload->bits.end());
    } else {
      std::mt19937_64 rng(bits_seed);
      for (std::size_t i = 0; i < random_length; ++i) {
        out.bits.push_back(static_cast<std::uint8_t>(rng() >> 63));
      }
    }
    return out;
  }

  KalmanParams kalman_for(const SensorTrace& trace) const;
};

inline KalmanParams ExperimentConfig::kalman_for(const SensorTrace& trace) const {
  return resolve_kalman_params(trace, kalman_q, kalman_r, kalman_x0, kalman_p0);
}

namespace config_detail {

inline double to_double(const std::string& key, const std::string& value) {
  try {
    return io_detail::parse_double(value, "key '" + key + "'");
  } catch (const FormatError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: key '" + key + "': '" + value + "' is not a non-negative integer");
  }
  return v;
}

inline std::string fmt(double v) { return io_detail::format("%.17g", v); }

}  // namespace config_detail

inline void apply_config_value(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
  using namespace config_detail;
  auto d = [&] { return to_double(key, value); };
  auto u = [&] { return to_u64(key, value); };
  auto z = [&] { return static_cast<std::size_t>(to_u64(key, value)); };

  const std::map<std::string_view, std::function<void()>> table = {
      {"timing.t_on", [&] { c.timing.t_on = d(); }},
      {"timing.t_off", [&] { c.timing.t_off = d(); }},
      {"timing.mode",
       [&] {
         if (value == "framed") {
           c.timing.mode = TimingMode::FramedSymbol;
         } else if (value == "variable") {
           c.timing.mode = TimingMode::VariableLength;
         } else {
           throw ConfigError("config: key 'timing.mode': expected 'framed' or 'variable', got '" +
                             value + "'");
         }
       }},
      {"channel.flow_rate", [&] { c.channel.flow_rate = d(); }},
      {"channel.tube_diameter", [&] { c.channel.tube_diameter = d(); }},
      {"channel.distance_to_sensor", [&] { c.channel.distance_to_sensor = d(); }},
      {"channel.loop_length", [&] { c.channel.loop_length = d(); }},
      {"channel.dispersion_coeff", [&] { c.channel.dispersion_coeff = d(); }},
      {"channel.initial_spread", [&] { c.channel.initial_spread = d(); }},
      {"channel.pass_decay", [&] { c.channel.pass_decay = d(); }},
      {"channel.echo_cutoff", [&] { c.channel.echo_cutoff = d(); }},
      {"channel.noise_std", [&] { c.channel.noise_std = d(); }},
      {"channel.spike_rate", [&] { c.channel.spike_rate = d(); }},
      {"channel.spike_amplitude_max", [&] { c.channel.spike_amplitude_max = d(); }},
      {"channel.sample_interval", [&] { c.channel.sample_interval = d(); }},
      {"channel.seed", [&] { c.channel.rng_seed = u(); }},
      {"channel.max_samples", [&] { c.channel.max_samples = z(); }},
      {"channel.dose", [&] { c.dose = d(); }},
      {"maf.window", [&] { c.maf_window = z(); }},
      {"kalman.q", [&] { c.kalman_q = d(); }},
      {"kalman.r", [&] { c.kalman_r = d(); }},
      {"kalman.x0", [&] { c.kalman_x0 = d(); }},
      {"kalman.p0", [&] { c.kalman_p0 = d(); }},
      {"peak.threshold", [&] { c.peak_threshold = d(); }},
      {"peak.min_distance", [&] { c.peak_min_distance = z(); }},
      {"peak.threshold_fraction", [&] { c.threshold_rule.fraction = d(); }},
      {"peak.threshold_percentile", [&] { c.threshold_rule.percentile = d(); }},
      {"eval.tolerance", [&] { c.tolerance = d(); }},
      {"decode.window", [&] { c.decode_window = d(); }},
      {"bits.payload",
       [&] {
         try {
           c.payload = parse_bits(value);
         } catch (const FormatError& e) {
           throw ConfigError(std::string("config: key 'bits.payload': ") + e.what());
         }
       }},
      {"bits.random_length", [&] { c.random_length = z(); }},
      {"bits.seed", [&] { c.bits_seed = u(); }},
      {"bits.preamble", [&] { c.preamble = z(); }},
  };
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second();
}

inline ExperimentConfig parse_config(const std::map<std::string, std::string>& kv,
                                     ExperimentConfig base = {}) {
  for (const auto& [key, value] : kv) apply_config_value(base, key, value);
  base.validate();
  return base;
}

inline ExperimentConfig parse_config_text(std::string_view text, ExperimentConfig base = {}) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(n) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return parse_config(kv, std::move(base));
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::map<std::string, std::string> kv;
  try {
    kv = read_key_values(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(kv);
}

// BUBBLELINK_SEED, when set, replaces the channel seed.
inline void apply_env_overrides(ExperimentConfig& c) {
  if (const char* seed = std::getenv("BUBBLELINK_SEED"); seed != nullptr && *seed != '\0') {
    c.channel.rng_seed = config_detail::to_u64("BUBBLELINK_SEED", seed);
  }
}

// Canonical key=value rendering; parse_config_text(format_config(c)) == c.
inline std::string format_config(const ExperimentConfig& c) {
  using config_detail::fmt;
  std::ostringstream o;
  o << "timing.t_on=" << fmt(c.timing.t_on) << '\n'
    << "timing.t_off=" << fmt(c.timing.t_off) << '\n'
    << "timing.mode="
    << (c.timing.mode == TimingMode::FramedSymbol ? "framed" : "variable") << '\n'
    << "channel.flow_rate=" << fmt(c.channel.flow_rate) << '\n'
    << "channel.tube_diameter=" << fmt(c.channel.tube_diameter) << '\n'
    << "channel.distance_to_sensor=" << fmt(c.channel.distance_to_sensor) << '\n'
    << "channel.loop_length=" << fmt(c.channel.loop_length) << '\n'
    << "channel.dispersion_coeff=" << fmt(c.channel.dispersion_coeff) << '\n'
    << "channel.initial_spread=" << fmt(c.channel.initial_spread) << '\n'
    << "channel.pass_decay=" << fmt(c.channel.pass_decay) << '\n'
    << "channel.echo_cutoff=" << fmt(c.channel.echo_cutoff) << '\n'
    << "channel.noise_std=" << fmt(c.channel.noise_std) << '\n'
    << "channel.spike_rate=" << fmt(c.channel.spike_rate) << '\n'
    << "channel.spike_amplitude_max=" << fmt(c.channel.spike_amplitude_max) << '\n'
    << "channel.sample_interval=" << fmt(c.channel.sample_interval) << '\n'
    << "channel.seed=" << c.channel.rng_seed << '\n'
    << "channel.max_samples=" << c.channel.max_samples << '\n'
    << "channel.dose=" << fmt(c.dose) << '\n';
  if (c.maf_window) o << "maf.window=" << *c.maf_window << '\n';
  if (c.kalman_q) o << "kalman.q=" << fmt(*c.kalman_q) << '\n';
  if (c.kalman_r) o << "kalman.r=" << fmt(*c.kalman_r) << '\n';
  if (c.kalman_x0) o << "kalman.x0=" << fmt(*c.kalman_x0) << '\n';
  if (c.kalman_p0) o << "kalman.p0=" << fmt(*c.kalman_p0) << '\n';
  if (c.peak_threshold) o << "peak.threshold=" << fmt(*c.peak_threshold) << '\n';
  if (c.peak_min_distance) o << "peak.min_distance=" << *c.peak_min_distance << '\n';
  o << "peak.threshold_fraction=" << fmt(c.threshold_rule.fraction) << '\n'
    << "peak.threshold_percentile=" << fmt(c.threshold_rule.percentile) << '\n'
    << "eval.tolerance=" << fmt(c.tolerance) << '\n'
    << "decode.window=" << fmt(c.decode_window) << '\n';
  if (c.payload) o << "bits.payload=" << format_bits(*c.payload) << '\n';
  o << "bits.random_length=" << c.random_length << '\n'
    << "bits.seed=" << c.bits_seed << '\n'
    << "bits.preamble=" << c.preamble << '\n';
  return o.str();
}

}  // namespace bubblelink
