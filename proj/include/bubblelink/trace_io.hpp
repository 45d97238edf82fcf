#pragma once

// CSV/text serialization for traces, schedules, peaks, bit sequences and
// metric reports. All files are UTF-8, LF line endings, '.' decimal point.
//
//   trace     time_s,amplitude         time = bin start, 6 decimals;
//                                      amplitude 9 significant digits
//   schedule  start_s,duration_s,dose  9 significant digits, then a
//                                      '# total_span_s=<s>' trailer
//   peaks     time_s,amplitude         6 decimals / 9 significant digits
//   bits      one line of '0'/'1'
//   report    key=value lines
//
// Readers validate the target type's invariants and name the offending row.
// A file must not be written by two callers at once.

#include <bubblelink/error.hpp>
#include <bubblelink/metrics.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/trace.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace bubblelink {

namespace io_detail {

inline std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

inline std::string fixed6(double v) {
  std::string s = format("%.6f", v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string sig9(double v) { return format("%.9g", v); }

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
  // A final newline leaves no empty trailing entry with getline, but blank
  // trailing lines are tolerated.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    cells.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return cells;
}

inline double parse_double(std::string_view cell, const std::string& where) {
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw FormatError(where + ": '" + std::string(cell) + "' is not a number");
  }
  if (!std::isfinite(v)) throw FormatError(where + ": value must be finite");
  return v;
}

struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, header is line 1
  std::vector<std::string> comments;      // '#' lines after the header, marker stripped
};

inline Table read_table(const std::filesystem::path& path, std::string_view header) {
  const auto lines = read_lines(path);
  const std::string name = path.string();
  if (lines.empty()) throw EmptyInputError(name + ": file is empty, expected header '" +
                                           std::string(header) + "'");
  if (lines.front() != header) {
    throw FormatError(name + ": line 1: expected header '" + std::string(header) + "', got '" +
                      lines.front() + "'");
  }
  const std::size_t columns = split(header, ',').size();
  Table t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!lines[i].empty() && lines[i].front() == '#') {
      t.comments.push_back(lines[i].substr(1));
      continue;
    }
    const auto cells = split(lines[i], ',');
    const std::string row = name + ": row " + std::to_string(i + 1);
    if (cells.size() != columns) {
      throw FormatError(row + ": expected " + std::to_string(columns) + " columns, got " +
                        std::to_string(cells.size()));
    }
    std::vector<double> values;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(parse_double(cells[c], row + ", column " + std::to_string(c + 1)));
    }
    t.rows.push_back(std::move(values));
    t.line_numbers.push_back(i + 1);
  }
  return t;
}

}  // namespace io_detail

inline constexpr double kUniformSpacingTolerance = 1e-6;

// Reads a trace. The sample interval comes from the first two rows, snapped
// to the 1e-6 s grid the writer prints on; a one-row file uses
// `single_row_interval`.
inline SensorTrace read_trace(const std::filesystem::path& path,
                              double single_row_interval = 0.040) {
  const auto table = io_detail::read_table(path, "time_s,amplitude");
  if (table.rows.empty()) throw EmptyInputError(path.string() + ": trace has no samples");

  SensorTrace trace;
  trace.t0 = table.rows[0][0];
  trace.sample_interval = single_row_interval;
  if (table.rows.size() > 1) {
    trace.sample_interval = std::round((table.rows[1][0] - trace.t0) * 1e6) / 1e6;
    if (!(trace.sample_interval > 0.0)) {
      throw FormatError(path.string() + ": row 3: times must be strictly ascending");
    }
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i > 0) {
      const double step = table.rows[i][0] - table.rows[i - 1][0];
      if (std::abs(step - trace.sample_interval) > kUniformSpacingTolerance + 1e-12) {
        throw FormatError(path.string() + ": row " + std::to_string(table.line_numbers[i]) +
                          ": non-uniform spacing (step " + io_detail::fixed6(step) +
                          " s, expected " + io_detail::fixed6(trace.sample_interval) + " s)");
      }
    }
    trace.samples.push_back(table.rows[i][1]);
  }
  return trace;
}

inline std::string format_trace(const SensorTrace& trace) {
  std::string out = "time_s,amplitude\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += io_detail::fixed6(trace.bin_start(i));
    out += ',';
    out += io_detail::sig9(trace.samples[i]);
    out += '\n';
  }
  return out;
}

inline void write_trace(const SensorTrace& trace, const std::filesystem::path& path) {
  if (!(trace.sample_interval > 0.0)) throw InvariantError("trace: sample_interval must be > 0");
  for (double s : trace.samples) {
    if (!std::isfinite(s)) throw InvariantError("trace: samples must be finite");
  }
  io_detail::write_text(path, format_trace(trace));
}

inline InjectionSchedule read_schedule(const std::filesystem::path& path) {
  const auto table = io_detail::read_table(path, "start_s,duration_s,dose");
  InjectionSchedule s;
  for (const auto& row : table.rows) {
    s.events.push_back({row[0], row[1], row[2]});
    s.total_span = std::max(s.total_span, row[0] + row[1]);
  }
  constexpr std::string_view kSpanKey = " total_span_s=";
  for (const auto& c : table.comments) {
    if (c.rfind(kSpanKey, 0) == 0) {
      s.total_span = io_detail::parse_double(std::string_view(c).substr(kSpanKey.size()),
                                             path.string() + ": total_span_s");
    }
  }
  try {
    s.validate();
  } catch (const InvariantError& e) {
    throw InvariantError(path.string() + ": " + e.what());
  }
  return s;
}

// Without the trailer, readers fall back to the end of the last event as the
// total span.
inline void write_schedule(const InjectionSchedule& schedule, const std::filesystem::path& path) {
  schedule.validate();
  std::string out = "start_s,duration_s,dose\n";
  for (const auto& e : schedule.events) {
    out += io_detail::sig9(e.start) + ',' + io_detail::sig9(e.duration) + ',' +
           io_detail::sig9(e.dose) + '\n';
  }
  out += "# total_span_s=" + io_detail::sig9(schedule.total_span) + '\n';
  io_detail::write_text(path, out);
}

inline PeakSet read_peaks(const std::filesystem::path& path) {
  const auto table = io_detail::read_table(path, "time_s,amplitude");
  PeakSet p;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i > 0 && !(table.rows[i][0] > table.rows[i - 1][0])) {
      throw InvariantError(path.string() + ": row " + std::to_string(table.line_numbers[i]) +
                           ": peak times must be strictly ascending");
    }
    p.peaks.push_back({table.rows[i][0], table.rows[i][1]});
  }
  return p;
}

inline void write_peaks(const PeakSet& peaks, const std::filesystem::path& path) {
  std::string out = "time_s,amplitude\n";
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const auto& p = peaks.peaks[i];
    if (i > 0 && !(p.time > peaks.peaks[i - 1].time)) {
      throw InvariantError("peaks: times must be strictly ascending");
    }
    out += io_detail::fixed6(p.time) + ',' + io_detail::sig9(p.amplitude) + '\n';
  }
  io_detail::write_text(path, out);
}

inline BitSequence parse_bits(std::string_view text) {
  BitSequence b;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') {
      throw FormatError("bits: column " + std::to_string(i + 1) + ": expected '0' or '1', got '" +
                        std::string(1, text[i]) + "'");
    }
    b.bits.push_back(static_cast<std::uint8_t>(text[i] - '0'));
  }
  return b;
}

inline std::string format_bits(const BitSequence& bits) {
  bits.validate();
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits.bits) s += static_cast<char>('0' + b);
  return s;
}

inline BitSequence read_bits(const std::filesystem::path& path) {
  const auto lines = io_detail::read_lines(path);
  if (lines.size() > 1) {
    throw FormatError(path.string() + ": bits file must hold a single line");
  }
  try {
    return parse_bits(lines.empty() ? std::string_view{} : std::string_view{lines.front()});
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_bits(const BitSequence& bits, const std::filesystem::path& path) {
  io_detail::write_text(path, format_bits(bits) + '\n');
}

inline std::string format_report(const MetricsReport& r) {
  std::ostringstream out;
  out << "tp=" << r.tp << '\n'
      << "fp=" << r.fp << '\n'
      << "fn=" << r.fn << '\n'
      << "precision=" << io_detail::sig9(r.precision) << '\n'
      << "recall=" << io_detail::sig9(r.recall) << '\n'
      << "f1=" << io_detail::sig9(r.f1) << '\n'
      << "ber=" << io_detail::sig9(r.ber) << '\n'
      << "bsr=" << io_detail::sig9(r.bsr) << '\n'
      << "peaks_total=" << r.peaks_total << '\n'
      << "bits_sent=" << r.bits_sent << '\n'
      << "ber_bits_sent=" << io_detail::sig9(r.ber_bits_sent) << '\n';
  return out.str();
}

inline void write_report(const MetricsReport& r, const std::filesystem::path& path) {
  io_detail::write_text(path, format_report(r));
}

// key=value pairs; blank lines and '#' comments are skipped.
inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  const auto lines = io_detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw FormatError(path.string() + ": line " + std::to_string(i + 1) +
                        ": expected key=value");
    }
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    if (!out.emplace(std::string(key), std::string(value)).second) {
      throw FormatError(path.string() + ": line " + std::to_string(i + 1) + ": duplicate key '" +
                        std::string(key) + "'");
    }
  }
  return out;
}

inline MetricsReport read_report(const std::filesystem::path& path) {
  const auto kv = read_key_values(path);
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) { return io_detail::parse_double(get(key), key); };
  auto count = [&](const std::string& key) {
    const double v = num(key);
    if (v < 0.0 || v != std::floor(v)) throw FormatError(path.string() + ": " + key +
                                                         " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  };
  MetricsReport r;
  r.tp = count("tp");
  r.fp = count("fp");
  r.fn = count("fn");
  r.precision = num("precision");
  r.recall = num("recall");
  r.f1 = num("f1");
  r.ber = num("ber");
  r.bsr = num("bsr");
  r.peaks_total = count("peaks_total");
  r.bits_sent = count("bits_sent");
  r.ber_bits_sent = num("ber_bits_sent");
  return r;
}

}  // namespace bubblelink
