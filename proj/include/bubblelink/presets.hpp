#pragma once

// Built-in experiment presets. `paper-like` mirrors presets/paper-like.conf
// in the source tree; a test keeps the two in sync.
//
// The loop length, injection-to-sensor distance, spreading and noise levels
// are calibration values, not measurements: the bench geometry fixes only
// the tube diameter, flow rate and 40 ms sensor bins.

#include <bubblelink/config.hpp>
#include <bubblelink/error.hpp>

#include <string>
#include <string_view>

namespace bubblelink {

inline constexpr std::string_view kPaperLikePreset = R"(# paper-like: periodic injections on the bench channel
timing.t_on=0.3
timing.t_off=2.0
timing.mode=framed
channel.flow_rate=1.24
channel.tube_diameter=0.009525
channel.distance_to_sensor=0.5
channel.loop_length=2.0
channel.dispersion_coeff=0.05
channel.initial_spread=0.05
channel.pass_decay=0.35
channel.echo_cutoff=0.05
channel.noise_std=0.65
channel.spike_rate=0.1
channel.spike_amplitude_max=2.0
channel.sample_interval=0.04
channel.seed=42
channel.dose=1.0
peak.threshold_fraction=0.6
peak.threshold_percentile=99
peak.min_distance=16
eval.tolerance=1.0
decode.window=1.0
bits.preamble=1
bits.payload=1111111111111111111111111111111111111111111111111
)";

inline ExperimentConfig preset_config(std::string_view name) {
  if (name == "paper-like") return parse_config_text(kPaperLikePreset);
  throw ConfigError("unknown preset '" + std::string(name) + "' (available: paper-like)");
}

}  // namespace bubblelink
