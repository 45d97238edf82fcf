// bubblelink: command-line runner for the microbubble OOK link toolkit.
//
// Exit codes: 0 success, 1 I/O error, 2 validation error.

#include <bubblelink/bubblelink.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace bl = bubblelink;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

bl::TimingParams make_timing(double t_on, double t_off, const std::string& mode) {
  bl::TimingParams t;
  t.t_on = t_on;
  t.t_off = t_off;
  if (mode == "framed") {
    t.mode = bl::TimingMode::FramedSymbol;
  } else if (mode == "variable") {
    t.mode = bl::TimingMode::VariableLength;
  } else {
    throw bl::ConfigError("--mode: expected 'framed' or 'variable', got '" + mode + "'");
  }
  t.validate();
  return t;
}

bl::ExperimentConfig load_experiment(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty()) {
    throw bl::ConfigError("--config and --preset are mutually exclusive");
  }
  bl::ExperimentConfig c;
  if (!config_path.empty()) {
    c = bl::load_config(config_path);
  } else if (!preset.empty()) {
    c = bl::preset_config(preset);
  }
  bl::apply_env_overrides(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubblelink - microbubble on-off keying link toolkit"};
  app.require_subcommand(1);

  // encode
  auto* enc = app.add_subcommand("encode", "Encode a bit string into an injection schedule");
  std::string enc_bits, enc_bits_file, enc_mode = "framed", enc_out;
  double enc_t_on = 0.3, enc_t_off = 2.0, enc_dose = 1.0;
  auto* enc_bits_opt = enc->add_option("--bits", enc_bits, "Bits as a 0/1 string");
  enc->add_option("--bits-file", enc_bits_file, "Bits file")->excludes(enc_bits_opt);
  enc->add_option("--t-on", enc_t_on, "Injection duration [s]")->capture_default_str();
  enc->add_option("--t-off", enc_t_off, "Idle duration [s]")->capture_default_str();
  enc->add_option("--mode", enc_mode, "framed | variable")->capture_default_str();
  enc->add_option("--dose", enc_dose, "Bolus strength")->capture_default_str();
  enc->add_option("--out", enc_out, "Schedule CSV")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate the channel for a schedule");
  std::string sim_schedule, sim_out, sim_config, sim_preset;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> sim_noise, sim_spike_rate, sim_spike_max;
  sim->add_option("--schedule", sim_schedule, "Schedule CSV")->required();
  sim->add_option("--out", sim_out, "Trace CSV")->required();
  sim->add_option("--config", sim_config, "Experiment config (channel.* keys are used)");
  sim->add_option("--preset", sim_preset, "Built-in preset, e.g. paper-like");
  sim->add_option("--seed", sim_seed, "RNG seed override");
  sim->add_option("--noise-std", sim_noise, "Background noise std override");
  sim->add_option("--spike-rate", sim_spike_rate, "Spike rate override [1/s]");
  sim->add_option("--spike-amplitude-max", sim_spike_max, "Spike amplitude cap override");

  // filter
  auto* flt = app.add_subcommand("filter", "Smooth a trace (maf | kalman | none)");
  std::string flt_in, flt_out, flt_method = "maf";
  bl::FilterOptions flt_opt;
  flt->add_option("--in", flt_in, "Input trace CSV")->required();
  flt->add_option("--out", flt_out, "Output trace CSV")->required();
  flt->add_option("--method", flt_method, "maf | kalman | none")->capture_default_str();
  flt->add_option("--window", flt_opt.window, "MAF window [samples]; default 0.3 s");
  flt->add_option("--q", flt_opt.q, "Kalman process noise variance");
  flt->add_option("--r", flt_opt.r, "Kalman measurement noise variance");
  flt->add_option("--x0", flt_opt.x0, "Kalman initial state");
  flt->add_option("--p0", flt_opt.p0, "Kalman initial variance");

  // detect
  auto* det = app.add_subcommand("detect", "Detect peaks in a trace");
  std::string det_in, det_out;
  bl::DetectOptions det_opt;
  det->add_option("--in", det_in, "Trace CSV")->required();
  det->add_option("--out", det_out, "Peaks CSV")->required();
  det->add_option("--threshold", det_opt.threshold, "Absolute threshold");
  det->add_option("--min-distance", det_opt.min_distance, "Minimum peak spacing [samples]");
  det->add_option("--threshold-fraction", det_opt.rule.fraction,
                  "Default threshold = fraction * percentile")
      ->capture_default_str();
  det->add_option("--threshold-percentile", det_opt.rule.percentile,
                  "Percentile used by the default threshold")
      ->capture_default_str();

  // decode
  auto* dec = app.add_subcommand("decode", "Decode peaks into bits (framed timing)");
  std::string dec_peaks, dec_out;
  double dec_t_on = 0.3, dec_t_off = 2.0, dec_window = 1.0;
  std::size_t dec_n_bits = 0;
  std::optional<double> dec_delay;
  dec->add_option("--peaks", dec_peaks, "Peaks CSV")->required();
  dec->add_option("--out", dec_out, "Bits file")->required();
  dec->add_option("--n-bits", dec_n_bits, "Number of bits to decode")->required();
  dec->add_option("--t-on", dec_t_on, "Injection duration [s]")->capture_default_str();
  dec->add_option("--t-off", dec_t_off, "Idle duration [s]")->capture_default_str();
  dec->add_option("--window", dec_window, "Half-width of the frame window [s]")
      ->capture_default_str();
  dec->add_option("--delay", dec_delay, "Channel delay [s]; default: from the first peak");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score peaks against the transmitted schedule");
  std::string eva_peaks, eva_truth, eva_out, eva_sent;
  double eva_tol = 1.0, eva_delay = 0.0;
  eva->add_option("--peaks", eva_peaks, "Peaks CSV")->required();
  eva->add_option("--truth", eva_truth, "Schedule CSV")->required();
  eva->add_option("--tolerance", eva_tol, "Matching tolerance [s]")->capture_default_str();
  eva->add_option("--delay", eva_delay, "Channel latency added to the truth [s]")
      ->capture_default_str();
  eva->add_option("--sent", eva_sent, "Transmitted bits file (for ber_bits_sent)");
  eva->add_option("--out", eva_out, "Report file (key=value)");

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "encode -> simulate -> raw/MAF/KF -> evaluate");
  std::string pip_config, pip_preset, pip_out;
  std::optional<std::uint64_t> pip_seed;
  pip->add_option("--config", pip_config, "Experiment config file");
  pip->add_option("--preset", pip_preset, "Built-in preset, e.g. paper-like");
  pip->add_option("--out-dir", pip_out, "Output directory")->required();
  pip->add_option("--seed", pip_seed, "Channel seed override");

  // plot
  auto* plt = app.add_subcommand("plot", "Render a trace as SVG");
  std::string plt_trace, plt_peaks, plt_truth, plt_out;
  bl::PlotOptions plt_opt;
  plt->add_option("--trace", plt_trace, "Trace CSV")->required();
  plt->add_option("--peaks", plt_peaks, "Peaks CSV");
  plt->add_option("--truth", plt_truth, "Schedule CSV");
  plt->add_option("--truth-delay", plt_opt.truth_delay, "Shift applied to the schedule [s]");
  plt->add_option("--title", plt_opt.title, "Chart title");
  plt->add_option("--out", plt_out, "SVG file")->required();

  // rates
  auto* rat = app.add_subcommand("rates", "Print rate and overhead figures for a timing");
  double rat_t_on = 0.3, rat_t_off = 2.0, rat_dt = 0.040;
  int rat_min_intervals = 3;
  rat->add_option("--t-on", rat_t_on, "Injection duration [s]")->capture_default_str();
  rat->add_option("--t-off", rat_t_off, "Idle duration [s]")->capture_default_str();
  rat->add_option("--sample-interval", rat_dt, "Sensor bin [s]")->capture_default_str();
  rat->add_option("--min-intervals", rat_min_intervals, "Bins needed per symbol")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (enc->parsed()) {
      bl::BitSequence bits;
      if (!enc_bits_file.empty()) {
        bits = bl::read_bits(enc_bits_file);
      } else {
        bits = bl::parse_bits(enc_bits);
      }
      const auto s = bl::cmd_encode(bits, make_timing(enc_t_on, enc_t_off, enc_mode), enc_dose,
                                    enc_out);
      std::cout << "wrote " << s.events.size() << " injections, span " << s.total_span
                << " s to " << enc_out << '\n';
    } else if (sim->parsed()) {
      auto c = load_experiment(sim_config, sim_preset);
      if (sim_seed) c.channel.rng_seed = *sim_seed;
      if (sim_noise) c.channel.noise_std = *sim_noise;
      if (sim_spike_rate) c.channel.spike_rate = *sim_spike_rate;
      if (sim_spike_max) c.channel.spike_amplitude_max = *sim_spike_max;
      const auto t = bl::cmd_simulate(sim_schedule, c.channel, sim_out);
      std::cout << "wrote " << t.size() << " samples to " << sim_out << '\n';
    } else if (flt->parsed()) {
      flt_opt.method = bl::parse_filter_method(flt_method);
      const auto t = bl::cmd_filter(flt_in, flt_opt, flt_out);
      std::cout << "wrote " << t.size() << " samples to " << flt_out << '\n';
    } else if (det->parsed()) {
      const auto p = bl::cmd_detect(det_in, det_opt, det_out);
      std::cout << "wrote " << p.size() << " peaks to " << det_out << '\n';
    } else if (dec->parsed()) {
      const auto r = bl::cmd_decode(dec_peaks, make_timing(dec_t_on, dec_t_off, "framed"),
                                    dec_n_bits, dec_window, dec_delay, dec_out);
      if (r.warning) std::cerr << "warning: " << *r.warning << '\n';
      std::cout << bl::format_bits(r.bits) << '\n';
    } else if (eva->parsed()) {
      std::optional<bl::fs::path> sent, out;
      if (!eva_sent.empty()) sent = eva_sent;
      if (!eva_out.empty()) out = eva_out;
      const auto r = bl::cmd_evaluate(eva_peaks, eva_truth, eva_tol, eva_delay, sent, out);
      std::cout << bl::format_report(r);
    } else if (pip->parsed()) {
      auto c = load_experiment(pip_config, pip_preset);
      if (pip_seed) c.channel.rng_seed = *pip_seed;
      const auto res = bl::cmd_pipeline(c, pip_out);
      std::cout << bl::format_comparison(res.branches);
      for (const auto& b : res.branches) {
        if (b.decode_warning) std::cerr << "warning: " << b.name << ": " << *b.decode_warning << '\n';
      }
    } else if (plt->parsed()) {
      std::optional<bl::fs::path> peaks, truth;
      if (!plt_peaks.empty()) peaks = plt_peaks;
      if (!plt_truth.empty()) truth = plt_truth;
      bl::cmd_plot(plt_trace, peaks, truth, plt_out, plt_opt);
    } else if (rat->parsed()) {
      const auto t = make_timing(rat_t_on, rat_t_off, "framed");
      std::printf("symbol_duration_s=%.9g\n", t.symbol_duration());
      std::printf("raw_bit_rate=%.9g\n", bl::raw_bit_rate(t));
      std::printf("time_overhead=%.9g\n", bl::time_overhead(t));
      std::printf("uniform_avg_bit_duration_s=%.9g\n", bl::uniform_avg_bit_duration(t));
      std::printf("effective_bit_rate=%.9g\n", bl::effective_bit_rate(t));
      std::printf("duty_efficiency=%.9g\n", bl::duty_efficiency(t));
      std::printf("max_channel_bit_rate=%.9g\n",
                  bl::max_channel_bit_rate(rat_dt, rat_min_intervals));
    }
  } catch (const bl::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const bl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
