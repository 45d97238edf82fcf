#pragma once

#include <bubblelink/error.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace bubblelink {

// Closed-loop tube channel between injection point and sensor. Defaults are
// the bench geometry (3/8 inch tube at 1.24 L/min, 40 ms sensor bins); loop
// length and injection-to-sensor distance are calibration values.
struct ChannelParams {
  double flow_rate = 1.24;             // L/min
  double tube_diameter = 0.009525;     // m
  double distance_to_sensor = 0.5;     // m
  double loop_length = 2.0;            // m
  double dispersion_coeff = 0.05;      // s of std per sqrt(s) of travel
  double initial_spread = 0.05;        // s
  double pass_decay = 0.35;            // amplitude kept per loop pass
  double echo_cutoff = 0.05;           // relative to dose
  double noise_std = 0.0;
  double spike_rate = 0.0;             // spikes per second
  double spike_amplitude_max = 0.0;
  double sample_interval = 0.040;      // s
  std::uint64_t rng_seed = 42;
  std::size_t max_samples = 1'000'000;

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("channel: " + what); };
    if (!(flow_rate > 0.0)) fail("flow_rate must be > 0");
    if (!(tube_diameter > 0.0)) fail("tube_diameter must be > 0");
    if (!(distance_to_sensor > 0.0)) fail("distance_to_sensor must be > 0");
    if (!(distance_to_sensor <= loop_length)) fail("distance_to_sensor must be <= loop_length");
    if (!(dispersion_coeff >= 0.0)) fail("dispersion_coeff must be >= 0");
    if (!(initial_spread >= 0.0)) fail("initial_spread must be >= 0");
    if (initial_spread == 0.0 && dispersion_coeff == 0.0) {
      fail("initial_spread and dispersion_coeff cannot both be 0");
    }
    if (!(pass_decay >= 0.0 && pass_decay < 1.0)) fail("pass_decay must lie in [0, 1)");
    if (!(echo_cutoff > 0.0)) fail("echo_cutoff must be > 0");
    if (!(noise_std >= 0.0)) fail("noise_std must be >= 0");
    if (!(spike_rate >= 0.0)) fail("spike_rate must be >= 0");
    if (!(spike_amplitude_max >= 0.0)) fail("spike_amplitude_max must be >= 0");
    if (spike_rate > 0.0 && !(spike_amplitude_max > 0.0)) {
      fail("spike_amplitude_max must be > 0 when spike_rate > 0");
    }
    if (!(sample_interval > 0.0)) fail("sample_interval must be > 0");
    if (max_samples == 0) fail("max_samples must be >= 1");
  }
};

// Mean axial velocity in m/s for a volumetric flow in L/min through a round
// tube of the given diameter in m.
inline double mean_flow_velocity(double flow_rate_l_per_min, double tube_diameter_m) {
  if (!(flow_rate_l_per_min > 0.0) || !(tube_diameter_m > 0.0)) {
    throw ConfigError("mean_flow_velocity: flow rate and diameter must be > 0");
  }
  const double q = flow_rate_l_per_min * 1e-3 / 60.0;
  const double area = std::numbers::pi * tube_diameter_m * tube_diameter_m / 4.0;
  return q / area;
}

// One pass of a bolus past the sensor.
struct EchoPass {
  double center = 0.0;     // s
  double amplitude = 0.0;  // peak height
  double sigma = 0.0;      // s
};

// Passes k = 0, 1, ... of a single injection, stopping at the first pass
// whose amplitude drops below echo_cutoff * dose.
inline std::vector<EchoPass> echo_passes(const InjectionEvent& event, const ChannelParams& params,
                                         double velocity) {
  std::vector<EchoPass> out;
  const double floor_amp = params.echo_cutoff * event.dose;
  double amp = event.dose;
  for (int k = 0; amp >= floor_amp; ++k) {
    const double travel = (params.distance_to_sensor + k * params.loop_length) / velocity;
    const double center = event.midpoint() + travel;
    const double sigma =
        params.initial_spread + params.dispersion_coeff * std::sqrt(center - event.start);
    out.push_back({center, amp, sigma});
    if (params.pass_decay == 0.0) break;
    amp *= params.pass_decay;
  }
  return out;
}

namespace detail {

// Portable variates on top of std::mt19937_64, whose output sequence is fixed
// by the standard. Uniforms take the top 53 bits; normals use Box-Muller.
class ChannelRng {
 public:
  explicit ChannelRng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace detail

// Number of samples simulate() produces for this schedule: enough to cover
// the schedule span and every retained echo out to 4 sigma, at least one.
inline std::size_t simulated_sample_count(const InjectionSchedule& schedule,
                                          const ChannelParams& params) {
  const double v = mean_flow_velocity(params.flow_rate, params.tube_diameter);
  double end = schedule.total_span;
  for (const auto& e : schedule.events) {
    const auto passes = echo_passes(e, params, v);
    if (!passes.empty()) {
      end = std::max(end, passes.back().center + 4.0 * passes.back().sigma);
    }
  }
  const double bins = std::ceil(end / params.sample_interval - 1e-9);
  if (!(bins < static_cast<double>(params.max_samples) + 0.5)) {
    throw ResourceError("simulate: trace would need " + std::to_string(bins) +
                        " samples, cap is " + std::to_string(params.max_samples));
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(bins));
}

// Deterministic channel simulation: Gaussian boluses with sqrt-time spreading,
// recirculation echoes, point-sampled at bin centres, then Gaussian background
// noise and Poisson one-bin spikes, clamped at zero.
inline SensorTrace simulate(const InjectionSchedule& schedule, const ChannelParams& params) {
  schedule.validate();
  params.validate();
  const double v = mean_flow_velocity(params.flow_rate, params.tube_diameter);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError("simulate: degenerate flow velocity");
  }

  const std::size_t n = simulated_sample_count(schedule, params);
  SensorTrace trace{params.sample_interval, 0.0, std::vector<double>(n, 0.0)};
  const double dt = params.sample_interval;

  // Gaussian tails beyond 12 sigma are below 1e-31 of the peak.
  constexpr double kSupport = 12.0;
  for (const auto& e : schedule.events) {
    for (const auto& pass : echo_passes(e, params, v)) {
      const double lo_t = pass.center - kSupport * pass.sigma;
      const double hi_t = pass.center + kSupport * pass.sigma;
      const double lo = std::max(0.0, std::floor((lo_t - trace.t0) / dt - 0.5));
      const double hi = std::min(static_cast<double>(n) - 1.0, std::ceil((hi_t - trace.t0) / dt));
      if (hi < lo) continue;
      const double inv = 1.0 / (2.0 * pass.sigma * pass.sigma);
      for (auto i = static_cast<std::size_t>(lo); i <= static_cast<std::size_t>(hi); ++i) {
        const double d = trace.bin_center(i) - pass.center;
        trace.samples[i] += pass.amplitude * std::exp(-d * d * inv);
      }
    }
  }

  detail::ChannelRng rng(params.rng_seed);
  if (params.noise_std > 0.0) {
    for (auto& s : trace.samples) s += params.noise_std * rng.normal();
  }
  if (params.spike_rate > 0.0) {
    const double end = trace.t0 + static_cast<double>(n) * dt;
    for (double t = trace.t0 + rng.exponential(params.spike_rate); t < end;
         t += rng.exponential(params.spike_rate)) {
      auto bin = static_cast<std::size_t>((t - trace.t0) / dt);
      if (bin >= n) bin = n - 1;
      trace.samples[bin] += params.spike_amplitude_max * (1.0 - rng.uniform());
    }
  }
  for (auto& s : trace.samples) {
    if (s < 0.0) s = 0.0;
  }
  return trace;
}

}  // namespace bubblelink
