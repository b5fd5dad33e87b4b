#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/frame.hpp"
#include "sbd/histogram.hpp"
#include "sbd/rng.hpp"

namespace sbd {

struct MetricsConfig {
  int stats_grid = 8;         // B×B blocks for the mean/std metric
  int cum_grid = 4;           // G×G blocks for the cumulative edge histogram
  int cum_bins = 16;          // n_e
  int color_bins = 16;        // n, diff vector length is 3n
  int luma_bins = 32;         // Bhattacharyya over luma
  double edge_thresh = 64.0;  // τ_e on the 0..255 magnitude scale
  double block_thresh = 0.15; // τ_b on edge density
  int window_radius = 2;      // temporal context, pairs at t±radius
};

namespace detail {

// blocks fold trailing pixels into the last row/column
struct BlockRange {
  int begin, end;
};

inline int effective_blocks(int extent, int grid) { return grid < extent ? grid : extent; }

inline BlockRange block_range(int extent, int blocks, int i) {
  const int base = extent / blocks;
  return BlockRange{i * base, i + 1 == blocks ? extent : (i + 1) * base};
}

// trapezoid: 1 over the central 50% of the block, linear to 0 at the edges
inline double trapezoid_weight(int coord, int begin, int end) {
  const double u = (double(coord - begin) + 0.5) / double(end - begin);
  if (u < 0.25) return 4.0 * u;
  if (u > 0.75) return 4.0 * (1.0 - u);
  return 1.0;
}

}  // namespace detail

// Per-pixel gradient magnitude with the 3x3 Sobel kernels, edge-replication
// padding, scaled into [0,255] (divide by 4*sqrt(2), the kernel maximum).
inline std::vector<double> sobel_magnitude(const std::vector<std::uint8_t>& plane, int width,
                                           int height) {
  if (width < 3 || height < 3) raise(Errc::PlaneTooSmall, "Sobel needs at least 3x3");
  std::vector<double> mag(std::size_t(width) * std::size_t(height));
  const double scale = 4.0 * std::sqrt(2.0);
  auto at = [&](int x, int y) -> int {
    if (x < 0) x = 0;
    if (x >= width) x = width - 1;
    if (y < 0) y = 0;
    if (y >= height) y = height - 1;
    return plane[std::size_t(y) * width + x];
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int gx = -at(x - 1, y - 1) + at(x + 1, y - 1) - 2 * at(x - 1, y) + 2 * at(x + 1, y) -
                     at(x - 1, y + 1) + at(x + 1, y + 1);
      const int gy = -at(x - 1, y - 1) - 2 * at(x, y - 1) - at(x + 1, y - 1) + at(x - 1, y + 1) +
                     2 * at(x, y + 1) + at(x + 1, y + 1);
      double m = std::sqrt(double(gx) * gx + double(gy) * gy) / scale;
      if (m > 255.0) m = 255.0;
      mag[std::size_t(y) * width + x] = m;
    }
  }
  return mag;
}

// Mean absolute difference of per-block luma means and population stds,
// both normalized into [0,1].
inline std::pair<double, double> block_stats_metric(const Frame& prev, const Frame& cur,
                                                    int grid = 8) {
  check_same_geometry(prev, cur);
  const int w = prev.width(), h = prev.height();
  const int bx = detail::effective_blocks(w, grid);
  const int by = detail::effective_blocks(h, grid);
  double d_mean = 0.0, d_std = 0.0;
  for (int j = 0; j < by; ++j) {
    const auto ry = detail::block_range(h, by, j);
    for (int i = 0; i < bx; ++i) {
      const auto rx = detail::block_range(w, bx, i);
      double stats[2][2] = {};  // frame -> {mean, std}
      const Frame* frames[2] = {&prev, &cur};
      for (int f = 0; f < 2; ++f) {
        double sum = 0.0, sum2 = 0.0;
        for (int y = ry.begin; y < ry.end; ++y) {
          for (int x = rx.begin; x < rx.end; ++x) {
            const double s = frames[f]->luma(x, y);
            sum += s;
            sum2 += s * s;
          }
        }
        const double count = double(ry.end - ry.begin) * double(rx.end - rx.begin);
        const double mean = sum / count;
        double var = sum2 / count - mean * mean;
        if (var < 0.0) var = 0.0;
        stats[f][0] = mean;
        stats[f][1] = std::sqrt(var);
      }
      d_mean += std::abs(stats[1][0] - stats[0][0]);
      d_std += std::abs(stats[1][1] - stats[0][1]);
    }
  }
  const double blocks = double(bx) * double(by);
  return {d_mean / blocks / 255.0, d_std / blocks / 255.0};
}

// Sobel magnitudes weighted by a per-block trapezoid, binned per block,
// cumulated; mean L1 distance between the cumulative histograms, in [0,1].
inline double cumulative_edge_histogram_metric(const Frame& prev, const Frame& cur, int grid = 4,
                                               int bins = 16) {
  check_same_geometry(prev, cur);
  const int w = prev.width(), h = prev.height();
  const std::vector<double> mag_prev = sobel_magnitude(prev.gray(), w, h);
  const std::vector<double> mag_cur = sobel_magnitude(cur.gray(), w, h);
  const int bx = detail::effective_blocks(w, grid);
  const int by = detail::effective_blocks(h, grid);
  double total = 0.0;
  for (int j = 0; j < by; ++j) {
    const auto ry = detail::block_range(h, by, j);
    for (int i = 0; i < bx; ++i) {
      const auto rx = detail::block_range(w, bx, i);
      Histogram hist_prev, hist_cur;
      hist_prev.bins.assign(std::size_t(bins), 0.0);
      hist_cur.bins.assign(std::size_t(bins), 0.0);
      for (int y = ry.begin; y < ry.end; ++y) {
        const double wy = detail::trapezoid_weight(y, ry.begin, ry.end);
        for (int x = rx.begin; x < rx.end; ++x) {
          const double wgt = detail::trapezoid_weight(x, rx.begin, rx.end) * wy;
          const std::size_t px = std::size_t(y) * w + x;
          auto bin = [&](double m) {
            int b = int(m * bins / 255.0);
            return b >= bins ? bins - 1 : b;
          };
          hist_prev.bins[bin(wgt * mag_prev[px])] += 1.0;
          hist_cur.bins[bin(wgt * mag_cur[px])] += 1.0;
        }
      }
      hist_prev.normalize();
      hist_cur.normalize();
      total += l1_distance(cumulative(hist_prev.bins), cumulative(hist_cur.bins));
    }
  }
  double metric = total / (double(bx) * double(by)) / double(bins - 1);
  if (metric > 1.0) metric = 1.0;
  return metric;
}

// |ΔH_c[k]| for each RGB channel and bin; histograms are pixel counts
// normalized by frame area. Vector length 3n.
inline std::vector<double> color_hist_diff_vector(const Frame& prev, const Frame& cur,
                                                  int bins = 16) {
  check_same_geometry(prev, cur);
  const double area = double(prev.pixel_count());
  std::vector<double> out(std::size_t(3) * bins, 0.0);
  const RgbPlanes& a = prev.rgb();
  const RgbPlanes& b = cur.rgb();
  const std::vector<std::uint8_t>* chans_a[3] = {&a.r, &a.g, &a.b};
  const std::vector<std::uint8_t>* chans_b[3] = {&b.r, &b.g, &b.b};
  std::vector<double> ha(std::size_t(bins), 0.0);
  std::vector<double> hb(std::size_t(bins), 0.0);
  for (int c = 0; c < 3; ++c) {
    std::fill(ha.begin(), ha.end(), 0.0);
    std::fill(hb.begin(), hb.end(), 0.0);
    for (std::uint8_t s : *chans_a[c]) ha[bin_of_u8(s, bins)] += 1.0;
    for (std::uint8_t s : *chans_b[c]) hb[bin_of_u8(s, bins)] += 1.0;
    for (int k = 0; k < bins; ++k) {
      out[std::size_t(c) * bins + k] = std::abs(hb[k] - ha[k]) / area;
    }
  }
  return out;
}

// Fraction of the fixed 10x10 block grid whose edge density moved more
// than block_thresh after binarizing the Sobel magnitude at edge_thresh.
inline double edge_block_histogram_metric(const Frame& prev, const Frame& cur,
                                          double edge_thresh = 64.0, double block_thresh = 0.15) {
  check_same_geometry(prev, cur);
  const int w = prev.width(), h = prev.height();
  if (w < 10 || h < 10) raise(Errc::FrameTooSmall, "10x10 block grid needs at least 10x10");
  const std::vector<double> mag_prev = sobel_magnitude(prev.gray(), w, h);
  const std::vector<double> mag_cur = sobel_magnitude(cur.gray(), w, h);
  constexpr int kGrid = 10;
  int changed = 0;
  for (int j = 0; j < kGrid; ++j) {
    const auto ry = detail::block_range(h, kGrid, j);
    for (int i = 0; i < kGrid; ++i) {
      const auto rx = detail::block_range(w, kGrid, i);
      int edges_prev = 0, edges_cur = 0;
      for (int y = ry.begin; y < ry.end; ++y) {
        for (int x = rx.begin; x < rx.end; ++x) {
          const std::size_t px = std::size_t(y) * w + x;
          if (mag_prev[px] > edge_thresh) ++edges_prev;
          if (mag_cur[px] > edge_thresh) ++edges_cur;
        }
      }
      const double count = double(ry.end - ry.begin) * double(rx.end - rx.begin);
      if (std::abs(edges_cur - edges_prev) / count > block_thresh) ++changed;
    }
  }
  return double(changed) / (kGrid * kGrid);
}

inline double bhattacharyya_metric(const Frame& prev, const Frame& cur, int bins = 32) {
  check_same_geometry(prev, cur);
  return bhattacharyya_distance(luma_histogram(prev, bins), luma_histogram(cur, bins));
}

// PyScene-style content delta over HSV: circular hue distance capped at
// 180°, saturation and value in [0,1]; average of the three channel means.
inline double content_delta_metric(const Frame& prev, const Frame& cur) {
  check_same_geometry(prev, cur);
  const HsvPlanes& a = prev.hsv();
  const HsvPlanes& b = cur.hsv();
  const std::size_t n = prev.pixel_count();
  double dh = 0.0, ds = 0.0, dv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::abs(a.h[i] - b.h[i]);
    if (d > 180.0) d = 360.0 - d;
    dh += d;
    ds += std::abs(a.s[i] - b.s[i]);
    dv += std::abs(a.v[i] - b.v[i]);
  }
  const double count = double(n);
  return (dh / count / 180.0 + ds / count + dv / count) / 3.0;
}

// ---------------------------------------------------------------------------
// Feature assembly
// ---------------------------------------------------------------------------

struct FeatureVector {
  int center = 0;              // frame ordinal the vector describes
  std::vector<double> values;  // schema order
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
    rehash();
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::uint64_t hash() const { return hash_; }

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return int(i);
    }
    return -1;
  }

 private:
  void rehash() {
    std::string joined;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (i) joined.push_back('\n');
      joined += names_[i];
    }
    hash_ = fnv1a64(joined);
  }

  std::vector<std::string> names_;
  std::uint64_t hash_ = 0;
};

namespace detail {

inline std::string offset_label(int off) {
  if (off == 0) return "t";
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%+d", off);
  return buf;
}

inline std::string pair_label(int left_off) {
  return "[" + offset_label(left_off) + "," + offset_label(left_off + 1) + "]";
}

constexpr const char* kScalarNames[6] = {"blockmean", "blockstd",      "cumedge",
                                         "edgeblock", "bhattacharyya", "content"};

}  // namespace detail

// All metrics for one adjacent frame pair.
struct PairMetrics {
  double scalars[6] = {};          // order of detail::kScalarNames
  std::vector<double> color_diff;  // length 3n
  double color_sum = 0.0;
  double color_max = 0.0;
};

inline PairMetrics compute_pair_metrics(const Frame& prev, const Frame& cur,
                                        const MetricsConfig& cfg) {
  PairMetrics pm;
  const auto [d_mean, d_std] = block_stats_metric(prev, cur, cfg.stats_grid);
  pm.scalars[0] = d_mean;
  pm.scalars[1] = d_std;
  pm.scalars[2] = cumulative_edge_histogram_metric(prev, cur, cfg.cum_grid, cfg.cum_bins);
  pm.scalars[3] = edge_block_histogram_metric(prev, cur, cfg.edge_thresh, cfg.block_thresh);
  pm.scalars[4] = bhattacharyya_metric(prev, cur, cfg.luma_bins);
  pm.scalars[5] = content_delta_metric(prev, cur);
  pm.color_diff = color_hist_diff_vector(prev, cur, cfg.color_bins);
  for (double v : pm.color_diff) {
    pm.color_sum += v;
    if (v > pm.color_max) pm.color_max = v;
  }
  return pm;
}

inline PairMetrics zero_pair_metrics(const MetricsConfig& cfg) {
  PairMetrics pm;
  pm.color_diff.assign(std::size_t(3) * cfg.color_bins, 0.0);
  return pm;
}

// Schema: per pair all six scalars, then the full central-pair color diff
// vector, then (sum, max) reductions for the non-central pairs.
inline FeatureSchema make_schema(const MetricsConfig& cfg) {
  const int r = cfg.window_radius;
  std::vector<std::string> names;
  for (int p = -r; p < r; ++p) {
    for (const char* s : detail::kScalarNames) names.push_back(s + detail::pair_label(p));
  }
  static constexpr char kChan[3] = {'r', 'g', 'b'};
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < cfg.color_bins; ++k) {
      names.push_back("colorhist_" + std::string(1, kChan[c]) + std::to_string(k) +
                      detail::pair_label(-1));
    }
  }
  for (int p = -r; p < r; ++p) {
    if (p == -1) continue;
    names.push_back("colorhist_sum" + detail::pair_label(p));
    names.push_back("colorhist_max" + detail::pair_label(p));
  }
  return FeatureSchema(std::move(names));
}

// `pairs` holds the 2r adjacent-pair metrics for the window t-r..t+r,
// pairs[i] describing (t-r+i, t-r+i+1). The central pair is pairs[r-1].
inline FeatureVector assemble_from_pairs(std::span<const PairMetrics> pairs, int center,
                                         const MetricsConfig& cfg) {
  const int r = cfg.window_radius;
  if (r < 1 || int(pairs.size()) != 2 * r) raise(Errc::InvalidSpec, "need 2r adjacent pairs");
  FeatureVector fv;
  fv.center = center;
  fv.values.reserve(2 * r * 6 + 3 * cfg.color_bins + (2 * r - 1) * 2);
  for (const PairMetrics& pm : pairs) {
    for (double s : pm.scalars) fv.values.push_back(s);
  }
  const PairMetrics& central = pairs[std::size_t(r - 1)];
  fv.values.insert(fv.values.end(), central.color_diff.begin(), central.color_diff.end());
  for (int i = 0; i < 2 * r; ++i) {
    if (i == r - 1) continue;
    fv.values.push_back(pairs[std::size_t(i)].color_sum);
    fv.values.push_back(pairs[std::size_t(i)].color_max);
  }
  return fv;
}

// Feature vector for the centre frame of a full window of 2r+1 frames
// (callers replicate the boundary frame at stream edges).
inline FeatureVector assemble_features(std::span<const Frame* const> window,
                                       const MetricsConfig& cfg) {
  const int r = cfg.window_radius;
  if (int(window.size()) != 2 * r + 1) raise(Errc::InvalidSpec, "window must hold 2r+1 frames");
  std::vector<PairMetrics> pairs;
  pairs.reserve(std::size_t(2) * r);
  for (int i = 0; i + 1 < int(window.size()); ++i) {
    if (window[i] == window[i + 1]) {
      pairs.push_back(zero_pair_metrics(cfg));  // replicated edge, metrics vanish
    } else {
      pairs.push_back(compute_pair_metrics(*window[i], *window[i + 1], cfg));
    }
  }
  return assemble_from_pairs(pairs, window[std::size_t(r)]->index(), cfg);
}

// Borrow a frame that is guaranteed to outlive the pipeline run
// (e.g. an element of a stable std::vector<Frame>).
inline std::shared_ptr<const Frame> borrow_frame(const Frame& f) {
  return std::shared_ptr<const Frame>(std::shared_ptr<void>(), &f);
}

// Streaming assembly: push frames in order, collect finished vectors.
// Also records the per-frame luma histogram used by flash suppression.
class FeaturePipeline {
 public:
  explicit FeaturePipeline(MetricsConfig cfg = {}) : cfg_(cfg), schema_(make_schema(cfg)) {
    if (cfg_.window_radius < 1) raise(Errc::InvalidSpec, "window radius must be >= 1");
  }

  const MetricsConfig& config() const { return cfg_; }
  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Histogram>& luma_histograms() const { return luma_hists_; }
  int frame_count() const { return pushed_; }

  std::vector<FeatureVector> push(std::shared_ptr<const Frame> frame) {
    luma_hists_.push_back(luma_histogram(*frame, cfg_.luma_bins));
    if (!frames_.empty()) {
      pair_metrics_.push_back(compute_pair_metrics(*frames_.back(), *frame, cfg_));
    }
    frames_.push_back(std::move(frame));
    if (frames_.size() > 2) frames_.pop_front();
    ++pushed_;
    return drain(false);
  }

  std::vector<FeatureVector> push(Frame&& frame) {
    return push(std::make_shared<const Frame>(std::move(frame)));
  }

  std::vector<FeatureVector> finish() { return drain(true); }

 private:
  // pair with left index p exists for p in [0, pushed-2]
  std::vector<FeatureVector> drain(bool flush) {
    const int r = cfg_.window_radius;
    std::vector<FeatureVector> out;
    while (next_emit_ < pushed_) {
      const int t = next_emit_;
      const int last_left = t + r - 1;
      if (!flush && last_left > pushed_ - 2) break;  // right context not complete yet
      std::vector<PairMetrics> pairs;
      pairs.reserve(std::size_t(2) * r);
      for (int p = t - r; p <= t + r - 1; ++p) {
        if (p < 0 || p > pushed_ - 2) {
          pairs.push_back(zero_pair_metrics(cfg_));  // replicated boundary frame
        } else {
          pairs.push_back(pair_metrics_[std::size_t(p - pair_base_)]);
        }
      }
      out.push_back(assemble_from_pairs(pairs, t, cfg_));
      ++next_emit_;
      // drop pairs no longer reachable by any future window
      while (pair_base_ < next_emit_ - r && !pair_metrics_.empty()) {
        pair_metrics_.pop_front();
        ++pair_base_;
      }
    }
    return out;
  }

  MetricsConfig cfg_;
  FeatureSchema schema_;
  std::deque<std::shared_ptr<const Frame>> frames_;  // only the trailing two are needed
  std::deque<PairMetrics> pair_metrics_;             // left index pair_base_ onward
  std::vector<Histogram> luma_hists_;
  int pair_base_ = 0;
  int pushed_ = 0;
  int next_emit_ = 0;
};

// CSV dump: header carries schema names (quoted, they contain commas),
// data rows use 9 significant digits.
inline void write_features_csv(std::ostream& out, const FeatureSchema& schema,
                               std::span<const FeatureVector> rows) {
  out << "frame_index";
  for (const std::string& name : schema.names()) out << ",\"" << name << "\"";
  out << '\n';
  char buf[64];
  for (const FeatureVector& fv : rows) {
    out << fv.center;
    for (double v : fv.values) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace sbd
