#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/frame.hpp"

namespace sbd {

// Normalized histogram (masses sum to 1, or all zero for an empty domain).
struct Histogram {
  std::vector<double> bins;

  int size() const { return int(bins.size()); }

  void normalize() {
    double total = 0.0;
    for (double b : bins) total += b;
    if (total > 0.0) {
      for (double& b : bins) b /= total;
    }
  }
};

// bin index for an 8-bit sample, `n` equal bins over [0,255]
inline int bin_of_u8(std::uint8_t value, int n) { return (int(value) * n) >> 8; }

inline Histogram luma_histogram(const Frame& frame, int bins) {
  if (bins < 2) raise(Errc::InvalidSpec, "histogram needs at least 2 bins");
  Histogram h;
  h.bins.assign(std::size_t(bins), 0.0);
  for (std::uint8_t s : frame.y()) h.bins[bin_of_u8(s, bins)] += 1.0;
  h.normalize();
  return h;
}

inline std::vector<double> cumulative(std::span<const double> bins) {
  std::vector<double> out(bins.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    acc += bins[i];
    out[i] = acc;
  }
  return out;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// sqrt(1 - sum(sqrt(p_i q_i))), clamped so rounding never drives it negative
inline double bhattacharyya_distance(const Histogram& p, const Histogram& q) {
  double bc = 0.0;
  for (std::size_t i = 0; i < p.bins.size(); ++i) bc += std::sqrt(p.bins[i] * q.bins[i]);
  if (bc > 1.0) bc = 1.0;
  return std::sqrt(1.0 - bc);
}

}  // namespace sbd
