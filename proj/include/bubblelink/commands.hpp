#pragma once

// File-to-file operations behind the CLI subcommands. The pipeline is built
// from these same calls on the files it writes, so replaying the
// subcommands by hand over a pipeline output directory reproduces its
// reports byte for byte.

#include <bubblelink/channel.hpp>
#include <bubblelink/config.hpp>
#include <bubblelink/dsp.hpp>
#include <bubblelink/metrics.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/trace_io.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bubblelink {

namespace fs = std::filesystem;

inline InjectionSchedule cmd_encode(const BitSequence& bits, const TimingParams& timing,
                                    double dose, const fs::path& out) {
  auto schedule = encode(bits, timing, dose);
  write_schedule(schedule, out);
  return schedule;
}

inline SensorTrace cmd_simulate(const fs::path& schedule_path, const ChannelParams& params,
                                const fs::path& out) {
  auto trace = simulate(read_schedule(schedule_path), params);
  write_trace(trace, out);
  return trace;
}

enum class FilterMethod { None, Maf, Kalman };

inline FilterMethod parse_filter_method(const std::string& name) {
  if (name == "none" || name == "raw") return FilterMethod::None;
  if (name == "maf") return FilterMethod::Maf;
  if (name == "kalman" || name == "kf") return FilterMethod::Kalman;
  throw ConfigError("filter: unknown method '" + name + "' (expected none, maf or kalman)");
}

// Unset MAF window and Kalman settings default from the input trace.
struct FilterOptions {
  FilterMethod method = FilterMethod::Maf;
  std::optional<std::size_t> window;
  std::optional<double> q;
  std::optional<double> r;
  std::optional<double> x0;
  std::optional<double> p0;
};

inline SensorTrace filter_trace(const SensorTrace& in, const FilterOptions& opt) {
  switch (opt.method) {
    case FilterMethod::None:
      return in;
    case FilterMethod::Maf: {
      auto p = default_maf_params(in.sample_interval);
      if (opt.window) p.window = *opt.window;
      return moving_average(in, p);
    }
    case FilterMethod::Kalman: {
      return kalman_filter(in, resolve_kalman_params(in, opt.q, opt.r, opt.x0, opt.p0));
    }
  }
  return in;
}

inline SensorTrace cmd_filter(const fs::path& in, const FilterOptions& opt, const fs::path& out) {
  auto filtered = filter_trace(read_trace(in), opt);
  write_trace(filtered, out);
  return filtered;
}

struct DetectOptions {
  std::optional<double> threshold;
  std::optional<std::size_t> min_distance;
  ThresholdRule rule;
};

inline PeakDetectParams resolve_detect_params(const SensorTrace& trace, const DetectOptions& opt) {
  auto p = default_peak_params(trace, opt.rule);
  if (opt.threshold) p.threshold = *opt.threshold;
  if (opt.min_distance) p.min_distance = *opt.min_distance;
  return p;
}

inline PeakSet cmd_detect(const fs::path& in, const DetectOptions& opt, const fs::path& out) {
  const auto trace = read_trace(in);
  auto peaks = detect_peaks(trace, resolve_detect_params(trace, opt));
  write_peaks(peaks, out);
  return peaks;
}

struct DecodeOutcome {
  BitSequence bits;
  double delay = 0.0;
  std::optional<std::string> warning;
};

// Without an explicit delay, the first detected peak is taken as the leading
// preamble 1-bit: delay = first peak time - t_on/2. A missed preamble makes
// this wrong; that case is only reported, the bits are still emitted.
inline DecodeOutcome cmd_decode(const fs::path& peaks_path, const TimingParams& timing,
                                std::size_t n_bits, double window, std::optional<double> delay,
                                const fs::path& out) {
  const auto peaks = read_peaks(peaks_path);
  DecodeOutcome res;
  if (delay) {
    res.delay = *delay;
  } else if (peaks.empty()) {
    res.warning = "no peaks detected, preamble missing; assuming zero delay";
  } else {
    res.delay = peaks.peaks.front().time - timing.t_on / 2.0;
    if (res.delay < 0.0) {
      res.warning = "first peak precedes the earliest possible preamble; clamping delay to 0";
      res.delay = 0.0;
    }
  }
  res.bits = decode(peaks, timing, res.delay, n_bits, window);
  write_bits(res.bits, out);
  return res;
}

// `delay` shifts the ground truth by the channel latency before matching.
inline InjectionSchedule shift_schedule(InjectionSchedule s, double delay) {
  for (auto& e : s.events) e.start += delay;
  s.total_span += delay;
  return s;
}

inline MetricsReport cmd_evaluate(const fs::path& peaks_path, const fs::path& truth_path,
                                  double tolerance, double delay,
                                  const std::optional<fs::path>& sent_bits_path,
                                  const std::optional<fs::path>& out) {
  const auto peaks = read_peaks(peaks_path);
  const auto truth = shift_schedule(read_schedule(truth_path), delay);
  std::size_t bits_sent = 0;
  if (sent_bits_path) bits_sent = read_bits(*sent_bits_path).size();
  auto report = evaluate(peaks, truth, tolerance, bits_sent);
  if (out) write_report(report, *out);
  return report;
}

// Transit time of the first pass from injection midpoint to sensor.
inline double channel_latency(const ChannelParams& c) {
  return c.distance_to_sensor / mean_flow_velocity(c.flow_rate, c.tube_diameter);
}

struct BranchResult {
  std::string name;
  MetricsReport report;
  BitSequence decoded;
  double decode_delay = 0.0;
  std::optional<std::string> decode_warning;
  std::size_t payload_errors = 0;
};

struct PipelineResult {
  BitSequence transmitted;
  std::size_t preamble = 0;
  double eval_delay = 0.0;
  std::vector<BranchResult> branches;  // raw, maf, kalman
};

inline std::string format_comparison(const std::vector<BranchResult>& branches) {
  std::string out = "branch,precision,recall,f1,ber,bsr\n";
  for (const auto& b : branches) {
    const auto& r = b.report;
    out += b.name + ',' + io_detail::sig9(r.precision) + ',' + io_detail::sig9(r.recall) + ',' +
           io_detail::sig9(r.f1) + ',' + io_detail::sig9(r.ber) + ',' + io_detail::sig9(r.bsr) +
           '\n';
  }
  return out;
}

// encode -> simulate once, then raw / MAF / Kalman branches through
// detect -> decode -> evaluate. Output directory layout:
//   config.conf, bits.txt, schedule.csv, trace_<b>.csv, peaks_<b>.csv,
//   decoded_<b>.txt, report_<b>.txt, comparison.csv, summary.txt
inline PipelineResult cmd_pipeline(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  io_detail::write_text(out_dir / "config.conf", format_config(config));

  PipelineResult res;
  res.preamble = config.preamble;
  res.transmitted = config.transmitted_bits();
  write_bits(res.transmitted, out_dir / "bits.txt");
  cmd_encode(read_bits(out_dir / "bits.txt"), config.timing, config.dose, out_dir / "schedule.csv");
  cmd_simulate(out_dir / "schedule.csv", config.channel, out_dir / "trace_raw.csv");

  FilterOptions maf{FilterMethod::Maf, config.maf_window, {}, {}, {}, {}};
  cmd_filter(out_dir / "trace_raw.csv", maf, out_dir / "trace_maf.csv");
  FilterOptions kf{FilterMethod::Kalman, {}, config.kalman_q, config.kalman_r, config.kalman_x0,
                   config.kalman_p0};
  cmd_filter(out_dir / "trace_raw.csv", kf, out_dir / "trace_kalman.csv");

  res.eval_delay = channel_latency(config.channel);
  const DetectOptions detect{config.peak_threshold, config.peak_min_distance,
                             config.threshold_rule};
  for (const std::string name : {"raw", "maf", "kalman"}) {
    BranchResult b;
    b.name = name;
    const auto trace = out_dir / ("trace_" + name + ".csv");
    const auto peaks = out_dir / ("peaks_" + name + ".csv");
    cmd_detect(trace, detect, peaks);
    auto dec = cmd_decode(peaks, config.timing, res.transmitted.size(), config.decode_window,
                          std::nullopt, out_dir / ("decoded_" + name + ".txt"));
    b.decoded = std::move(dec.bits);
    b.decode_delay = dec.delay;
    b.decode_warning = std::move(dec.warning);
    for (std::size_t i = res.preamble; i < res.transmitted.size(); ++i) {
      b.payload_errors += (b.decoded.bits[i] != res.transmitted.bits[i]);
    }
    b.report = cmd_evaluate(peaks, out_dir / "schedule.csv", config.tolerance, res.eval_delay,
                            out_dir / "bits.txt", out_dir / ("report_" + name + ".txt"));
    res.branches.push_back(std::move(b));
  }

  io_detail::write_text(out_dir / "comparison.csv", format_comparison(res.branches));

  std::ostringstream summary;
  summary << "bits_sent=" << res.transmitted.size() << '\n'
          << "preamble=" << res.preamble << '\n'
          << "ones_sent=" << res.transmitted.count_ones() << '\n'
          << "eval_delay_s=" << io_detail::sig9(res.eval_delay) << '\n';
  for (const auto& b : res.branches) {
    summary << b.name << ".decode_delay_s=" << io_detail::sig9(b.decode_delay) << '\n'
            << b.name << ".payload_bit_errors=" << b.payload_errors << '\n';
    if (b.decode_warning) summary << b.name << ".decode_warning=" << *b.decode_warning << '\n';
  }
  io_detail::write_text(out_dir / "summary.txt", summary.str());
  return res;
}

}  // namespace bubblelink
