#include <bubblelink/bubblelink.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace bubblelink;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" BUBBLELINK_CLI_PATH "' " + args +
                          " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bubblelink_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string at(const std::string& name) const { return "'" + (dir_ / name).string() + "'"; }

  fs::path dir_;
};

// Preset text with the given keys rewritten; an empty value drops the key.
std::string preset_with(const std::map<std::string, std::string>& edits) {
  std::istringstream in{std::string(kPaperLikePreset)};
  std::string out;
  for (std::string line; std::getline(in, line);) {
    const auto key = line.substr(0, line.find('='));
    if (const auto it = edits.find(key); it != edits.end()) {
      if (!it->second.empty()) out += key + '=' + it->second + '\n';
      continue;
    }
    out += line + '\n';
  }
  return out;
}

}  // namespace

TEST_F(Cli, EncodeWritesSchedule) {
  const auto r = run_cli("encode --bits 101 --t-on 0.3 --t-off 2.0 --out " + at("sched.csv"));
  ASSERT_EQ(r.code, 0);
  const auto s = read_schedule(dir_ / "sched.csv");
  ASSERT_EQ(s.events.size(), 2u);
  EXPECT_EQ(s.events[0].start, 0.0);
  EXPECT_EQ(s.events[1].start, 4.6);
  EXPECT_EQ(s.total_span, 6.9);
}

TEST_F(Cli, FilterKeepsConstantTrace) {
  const SensorTrace t{0.04, 0.0, std::vector<double>(100, 2.5)};
  write_trace(t, dir_ / "trace.csv");
  ASSERT_EQ(run_cli("filter --in " + at("trace.csv") + " --method maf --window 8 --out " +
                    at("f.csv"))
                .code,
            0);
  EXPECT_EQ(read_trace(dir_ / "f.csv"), t);
  EXPECT_EQ(slurp(dir_ / "f.csv"), slurp(dir_ / "trace.csv"));
}

TEST_F(Cli, EvaluatePerfectPeaks) {
  ASSERT_EQ(run_cli("encode --bits 1101 --out " + at("sched.csv")).code, 0);
  PeakSet p;
  for (const auto& e : read_schedule(dir_ / "sched.csv").events) p.peaks.push_back({e.midpoint(), 1});
  write_peaks(p, dir_ / "p.csv");
  const auto r = run_cli("evaluate --peaks " + at("p.csv") + " --truth " + at("sched.csv") +
                         " --tolerance 1.0 --out " + at("report.txt"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("f1=1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("ber=0\n"), std::string::npos) << r.out;
  const auto rep = read_report(dir_ / "report.txt");
  EXPECT_EQ(rep.f1, 1.0);
  EXPECT_EQ(rep.ber, 0.0);
  EXPECT_EQ(rep.bsr, 1.0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("rates").code, 0);
  // Usage and validation problems.
  EXPECT_EQ(run_cli("encode --bits 101").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("encode --bits 1x1 --out " + at("s.csv")).code, 2);
  EXPECT_EQ(run_cli("encode --bits 1 --t-on -1 --out " + at("s.csv")).code, 2);
  EXPECT_EQ(run_cli("pipeline --preset nope --out-dir " + at("o")).code, 2);
  std::ofstream(dir_ / "bad.csv") << "time_s,amplitude\n0,1\n0.04,x\n";
  EXPECT_EQ(run_cli("filter --in " + at("bad.csv") + " --out " + at("f.csv")).code, 2);
  // Filesystem problems.
  EXPECT_EQ(run_cli("filter --in " + at("missing.csv") + " --out " + at("f.csv")).code, 1);
  EXPECT_EQ(run_cli("encode --bits 1 --out " + at("no/such/dir/s.csv")).code, 1);
}

TEST_F(Cli, RatesPrintsFigures) {
  const auto r = run_cli("rates --t-on 0.3 --t-off 2.0");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("raw_bit_rate=0.434782609"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("uniform_avg_bit_duration_s=1.15"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("max_channel_bit_rate=8.33333333"), std::string::npos) << r.out;
}

TEST_F(Cli, DecodeUsesFirstPeakAsPreamble) {
  PeakSet p{{{1.87, 1}, {6.47, 1}}};
  write_peaks(p, dir_ / "p.csv");
  const auto r = run_cli("decode --peaks " + at("p.csv") + " --n-bits 3 --out " + at("b.txt"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp(dir_ / "b.txt"), "101\n");
}

TEST_F(Cli, PresetFileMatchesBuiltIn) {
  const auto file = slurp(fs::path(BUBBLELINK_SOURCE_DIR) / "presets" / "paper-like.conf");
  EXPECT_EQ(file, std::string(kPaperLikePreset));
  const auto cfg = preset_config("paper-like");
  EXPECT_EQ(cfg.transmitted_bits().count_ones(), 50u);
  EXPECT_EQ(cfg.channel.rng_seed, 42u);
  EXPECT_EQ(format_config(load_config(fs::path(BUBBLELINK_SOURCE_DIR) / "presets" /
                                      "paper-like.conf")),
            format_config(cfg));
}

TEST_F(Cli, ConfigRoundTripAndUnknownKey) {
  const auto cfg = preset_config("paper-like");
  EXPECT_EQ(format_config(parse_config_text(format_config(cfg))), format_config(cfg));
  EXPECT_THROW(parse_config_text("channel.flow=1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("timing.mode=variable\n"), ConfigError);
}

TEST_F(Cli, NoiselessPipelineRecoversPayload) {
  std::ofstream(dir_ / "quiet.conf")
      << preset_with({{"channel.noise_std", "0"}, {"channel.spike_rate", "0"}, {"bits.payload", ""}})
      << "bits.random_length=32\nbits.seed=5\n";

  const auto r = run_cli("pipeline --config " + at("quiet.conf") + " --out-dir " + at("out"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("branch,precision,recall,f1,ber,bsr\n", 0), 0u) << r.out;
  const auto sent = read_bits(dir_ / "out" / "bits.txt");
  ASSERT_EQ(sent.size(), 33u);
  for (const std::string b : {"raw", "maf", "kalman"}) {
    EXPECT_EQ(read_bits(dir_ / "out" / ("decoded_" + b + ".txt")), sent) << b;
    EXPECT_EQ(read_report(dir_ / "out" / ("report_" + b + ".txt")).ber, 0.0) << b;
  }
}

TEST_F(Cli, SubcommandsReproducePipeline) {
  ASSERT_EQ(run_cli("pipeline --preset paper-like --out-dir " + at("p")).code, 0);
  const auto p = dir_ / "p";
  const double delay = channel_latency(preset_config("paper-like").channel);
  char delay_s[64];
  std::snprintf(delay_s, sizeof delay_s, "%.17g", delay);

  ASSERT_EQ(run_cli("encode --bits-file " + at("p/bits.txt") + " --out " + at("s.csv")).code, 0);
  EXPECT_EQ(slurp(dir_ / "s.csv"), slurp(p / "schedule.csv"));
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --out " +
                    at("raw.csv"))
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "raw.csv"), slurp(p / "trace_raw.csv"));
  ASSERT_EQ(run_cli("filter --in " + at("raw.csv") + " --method kalman --out " + at("kf.csv")).code,
            0);
  EXPECT_EQ(slurp(dir_ / "kf.csv"), slurp(p / "trace_kalman.csv"));
  ASSERT_EQ(run_cli("filter --in " + at("raw.csv") + " --method maf --out " + at("maf.csv")).code,
            0);
  EXPECT_EQ(slurp(dir_ / "maf.csv"), slurp(p / "trace_maf.csv"));
  ASSERT_EQ(run_cli("detect --in " + at("maf.csv") +
                    " --threshold-fraction 0.6 --threshold-percentile 99 --min-distance 16 --out " + at("pk.csv"))
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "pk.csv"), slurp(p / "peaks_maf.csv"));
  ASSERT_EQ(run_cli("evaluate --peaks " + at("pk.csv") + " --truth " + at("s.csv") +
                    " --delay " + delay_s + " --sent " + at("p/bits.txt") + " --out " +
                    at("rep.txt"))
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "rep.txt"), slurp(p / "report_maf.txt"));
  ASSERT_EQ(run_cli("decode --peaks " + at("pk.csv") + " --n-bits 50 --out " + at("dec.txt")).code,
            0);
  EXPECT_EQ(slurp(dir_ / "dec.txt"), slurp(p / "decoded_maf.txt"));
}

TEST_F(Cli, SeedControlsNoise) {
  ASSERT_EQ(run_cli("encode --bits 1011 --out " + at("s.csv")).code, 0);
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --out " +
                    at("a.csv"))
                .code,
            0);
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --out " +
                    at("b.csv"))
                .code,
            0);
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --seed 7 --out " +
                    at("c.csv"))
                .code,
            0);
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --out " +
                        at("d.csv"),
                    "BUBBLELINK_SEED=7")
                .code,
            0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "c.csv"));
  EXPECT_EQ(slurp(dir_ / "c.csv"), slurp(dir_ / "d.csv"));
}

TEST_F(Cli, PlotIsDeterministicWithOneMarkerPerPeak) {
  ASSERT_EQ(run_cli("encode --bits 1101 --out " + at("s.csv")).code, 0);
  ASSERT_EQ(run_cli("simulate --schedule " + at("s.csv") + " --preset paper-like --out " +
                    at("t.csv"))
                .code,
            0);
  ASSERT_EQ(run_cli("detect --in " + at("t.csv") + " --out " + at("p.csv")).code, 0);
  const auto n_peaks = read_peaks(dir_ / "p.csv").size();

  ASSERT_EQ(run_cli("plot --trace " + at("t.csv") + " --out " + at("only.svg")).code, 0);
  ASSERT_EQ(run_cli("plot --trace " + at("t.csv") + " --peaks " + at("p.csv") + " --out " +
                    at("a.svg"))
                .code,
            0);
  ASSERT_EQ(run_cli("plot --trace " + at("t.csv") + " --peaks " + at("p.csv") + " --out " +
                    at("b.svg"))
                .code,
            0);

  auto count = [](const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto i = s.find(needle); i != std::string::npos; i = s.find(needle, i + 1)) ++n;
    return n;
  };
  const auto only = slurp(dir_ / "only.svg");
  EXPECT_EQ(count(only, "<polyline"), 1u);
  EXPECT_EQ(count(only, "<circle"), 0u);
  const auto a = slurp(dir_ / "a.svg");
  EXPECT_EQ(count(a, "<polyline"), 1u);
  EXPECT_EQ(count(a, "<circle"), n_peaks);
  EXPECT_GT(n_peaks, 0u);
  EXPECT_EQ(a, slurp(dir_ / "b.svg"));
}
