#pragma once

#include <cstddef>
#include <vector>

namespace bubblelink {

// Uniformly sampled sensor amplitude. Sample n covers the bin
// [t0 + n*dt, t0 + (n+1)*dt) and is attributed to the bin center.
struct SensorTrace {
  double sample_interval = 0.040;
  double t0 = 0.0;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  double bin_start(std::size_t n) const {
    return t0 + static_cast<double>(n) * sample_interval;
  }
  double bin_center(std::size_t n) const {
    return t0 + (static_cast<double>(n) + 0.5) * sample_interval;
  }

  // Same timing metadata, new samples.
  SensorTrace with_samples(std::vector<double> values) const {
    return SensorTrace{sample_interval, t0, std::move(values)};
  }

  bool operator==(const SensorTrace&) const = default;
};

struct Peak {
  double time = 0.0;
  double amplitude = 0.0;

  bool operator==(const Peak&) const = default;
};

// Detected "high" signals, times strictly ascending.
struct PeakSet {
  std::vector<Peak> peaks;

  std::size_t size() const { return peaks.size(); }
  bool empty() const { return peaks.empty(); }

  bool operator==(const PeakSet&) const = default;
};

}  // namespace bubblelink
