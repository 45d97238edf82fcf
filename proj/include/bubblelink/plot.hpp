#pragma once

// SVG 1.1 line chart of a trace with optional peak markers and ground-truth
// injection spans. Output is a pure function of the inputs.

#include <bubblelink/modem.hpp>
#include <bubblelink/trace.hpp>
#include <bubblelink/trace_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace bubblelink {

struct PlotOptions {
  int width = 1200;
  int height = 400;
  std::string title = "sensor trace";
  double truth_delay = 0.0;  // shift applied to injection spans
};

namespace plot_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace plot_detail

inline std::string render_svg(const SensorTrace& trace, const PeakSet* peaks,
                              const InjectionSchedule* truth, const PlotOptions& opt = {}) {
  using plot_detail::num;
  constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 40;
  const double pw = opt.width - kLeft - kRight;
  const double ph = opt.height - kTop - kBottom;

  const double t_begin = trace.t0;
  const double t_end = std::max(trace.bin_start(trace.size()), t_begin + trace.sample_interval);
  double y_max = 0.0;
  for (double s : trace.samples) y_max = std::max(y_max, s);
  if (peaks) {
    for (const auto& p : peaks->peaks) y_max = std::max(y_max, p.amplitude);
  }
  if (!(y_max > 0.0)) y_max = 1.0;
  y_max *= 1.05;

  auto sx = [&](double t) { return kLeft + (t - t_begin) / (t_end - t_begin) * pw; };
  auto sy = [&](double a) { return kTop + ph - std::clamp(a / y_max, 0.0, 1.0) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" +
         plot_detail::escape(opt.title) + "</text>\n";

  if (truth) {
    svg += "<g class=\"truth\" fill=\"black\" fill-opacity=\"0.15\">\n";
    for (const auto& e : truth->events) {
      const double a = std::clamp(e.start + opt.truth_delay, t_begin, t_end);
      const double b = std::clamp(e.start + opt.truth_delay + e.duration, t_begin, t_end);
      if (b <= a) continue;
      svg += "<rect x=\"" + num(sx(a)) + "\" y=\"" + num(kTop) + "\" width=\"" +
             num(sx(b) - sx(a)) + "\" height=\"" + num(ph) + "\"/>\n";
    }
    svg += "</g>\n";
  }

  // Axes with five ticks each.
  svg += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(kLeft + pw) +
         "\" y2=\"" + num(kTop + ph) + "\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(kTop + ph) + "\"/>\n";
  svg += "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = t_begin + (t_end - t_begin) * i / 4.0;
    const double a = y_max * i / 4.0;
    svg += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + num(t) + "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(a) + 4) +
           "\" text-anchor=\"end\">" + num(a) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(opt.height - 6.0) +
         "\" text-anchor=\"middle\">time [s]</text>\n</g>\n";

  svg += "<polyline class=\"trace\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0) svg += ' ';
    svg += num(sx(trace.bin_center(i))) + ',' + num(sy(trace.samples[i]));
  }
  svg += "\"/>\n";

  if (peaks) {
    svg += "<g class=\"peaks\" fill=\"#d62728\">\n";
    for (const auto& p : peaks->peaks) {
      svg += "<circle cx=\"" + num(sx(p.time)) + "\" cy=\"" + num(sy(p.amplitude)) +
             "\" r=\"3\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void cmd_plot(const std::filesystem::path& trace_path,
                     const std::optional<std::filesystem::path>& peaks_path,
                     const std::optional<std::filesystem::path>& truth_path,
                     const std::filesystem::path& out_svg, const PlotOptions& opt = {}) {
  const auto trace = read_trace(trace_path);
  std::optional<PeakSet> peaks;
  std::optional<InjectionSchedule> truth;
  if (peaks_path) peaks = read_peaks(*peaks_path);
  if (truth_path) truth = read_schedule(*truth_path);
  io_detail::write_text(out_svg, render_svg(trace, peaks ? &*peaks : nullptr,
                                            truth ? &*truth : nullptr, opt));
}

}  // namespace bubblelink
