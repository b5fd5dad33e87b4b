#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/events.hpp"
#include "sbd/gbdt.hpp"
#include "sbd/histogram.hpp"
#include "sbd/metrics.hpp"

namespace sbd {

namespace detail {

// local maximum with plateau tie-break at the first plateau frame
inline bool is_local_max(std::span<const double> track, int t) {
  const int n = int(track.size());
  const bool rise = t == 0 || track[std::size_t(t)] > track[std::size_t(t - 1)];
  const bool fall = t == n - 1 || track[std::size_t(t)] >= track[std::size_t(t + 1)];
  return rise && fall;
}

}  // namespace detail

// Cuts at local maxima of a scalar metric track that exceed theta.
inline std::vector<BoundaryEvent> threshold_classify(std::span<const double> track, double theta) {
  std::vector<BoundaryEvent> events;
  for (int t = 0; t < int(track.size()); ++t) {
    const double v = track[std::size_t(t)];
    if (!(v > theta)) continue;
    if (!detail::is_local_max(track, t)) continue;
    const double conf = theta > 0.0 ? std::min(1.0, v / (2.0 * theta)) : 1.0;
    events.push_back(BoundaryEvent::cut(t, conf));
  }
  return events;
}

// Per-scene threshold: flag t when m(t) > mean + k*std over the W frames
// around t (t itself excluded, window clipped at the stream edges) and
// m(t) > floor; then the same local-maximum rule as threshold_classify.
inline std::vector<BoundaryEvent> adaptive_threshold_classify(std::span<const double> track,
                                                              int window = 30, double k = 3.0,
                                                              double floor = 0.05) {
  const int n = int(track.size());
  if (window >= n) raise(Errc::WindowTooLarge, "window covers the whole track");
  if (window < 4) raise(Errc::InvalidSpec, "window must be at least 4");
  const int half = window / 2;
  std::vector<BoundaryEvent> events;
  for (int t = 0; t < n; ++t) {
    const double m = track[std::size_t(t)];
    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (int j = std::max(0, t - half); j <= std::min(n - 1, t + half); ++j) {
      if (j == t) continue;
      sum += track[std::size_t(j)];
      sum2 += track[std::size_t(j)] * track[std::size_t(j)];
      ++count;
    }
    const double mean = sum / count;
    double var = sum2 / count - mean * mean;
    if (var < 0.0) var = 0.0;
    const double level = mean + k * std::sqrt(var);
    if (!(m > level && m > floor)) continue;
    if (!detail::is_local_max(track, t)) continue;
    const double eff = std::max(level, floor);
    const double conf = eff > 0.0 ? std::min(1.0, m / (2.0 * eff)) : 1.0;
    events.push_back(BoundaryEvent::cut(t, conf));
  }
  return events;
}

struct ClassifyParams {
  double p_cut = 0.5;
  double p_grad = 0.5;
  int min_gap = 10;        // postfilter: merge events closer than this
  int flash_window = 3;    // postfilter: look-ahead for return-to-baseline
  double flash_sim = 0.05; // postfilter: Bhattacharyya similarity bound
};

// Per-frame arbitration between the cut and gradual models. Cuts fire at
// local maxima of the cut-probability track; runs of at least two
// consecutive frames with gradual probability >= p_grad (split at cut
// frames, cut takes precedence) become one gradual event each.
inline std::vector<BoundaryEvent> classify_stream(const std::vector<FeatureVector>& features,
                                                  const FeatureSchema& schema,
                                                  const GbdtModel& cut_model,
                                                  const GbdtModel* grad_model,
                                                  const ClassifyParams& params = {}) {
  check_schema(cut_model, schema);
  if (grad_model) check_schema(*grad_model, schema);
  const int n = int(features.size());
  std::vector<double> p_cut(std::size_t(n), 0.0);
  std::vector<double> p_grad(std::size_t(n), 0.0);
  for (int t = 0; t < n; ++t) {
    p_cut[std::size_t(t)] = cut_model.predict(features[std::size_t(t)].values);
    if (grad_model) p_grad[std::size_t(t)] = grad_model->predict(features[std::size_t(t)].values);
  }

  std::vector<bool> is_cut(std::size_t(n), false);
  std::vector<BoundaryEvent> events;
  for (int t = 0; t < n; ++t) {
    if (p_cut[std::size_t(t)] >= params.p_cut && detail::is_local_max(p_cut, t)) {
      is_cut[std::size_t(t)] = true;
      events.push_back(BoundaryEvent::cut(t, p_cut[std::size_t(t)]));
    }
  }
  int run_start = -1;
  auto flush_run = [&](int end_exclusive) {
    if (run_start >= 0 && end_exclusive - run_start >= 2) {
      double conf = 0.0;
      for (int j = run_start; j < end_exclusive; ++j) conf += p_grad[std::size_t(j)];
      events.push_back(
          BoundaryEvent::gradual(run_start, end_exclusive - 1, conf / (end_exclusive - run_start)));
    }
    run_start = -1;
  };
  for (int t = 0; t < n; ++t) {
    if (p_grad[std::size_t(t)] >= params.p_grad && !is_cut[std::size_t(t)]) {
      if (run_start < 0) run_start = t;
    } else {
      flush_run(t);
    }
  }
  flush_run(n);
  sort_events(events);
  return events;
}

// Similarity oracle for flash suppression: Bhattacharyya distance between
// two frames, by ordinal.
using FrameSimilarityFn = std::function<double(int, int)>;

inline FrameSimilarityFn histogram_similarity(const std::vector<Histogram>& luma_hists) {
  return [&luma_hists](int a, int b) {
    return bhattacharyya_distance(luma_hists[std::size_t(a)], luma_hists[std::size_t(b)]);
  };
}

// False-positive filtering: (1) events closer than min_gap frames collapse
// to the higher-confidence one; (2) flash suppression. A cut at t claims a
// boundary between old content (ending at the frame before the earliest
// merged candidate) and new content (starting at t). It is dropped when
// either side gives the flash away within flash_window frames:
//   - the old content returns after the event (a cut fired on the flash
//     onset), or
//   - the new content was already on screen just before the event (a cut
//     fired on the flash decay).
inline std::vector<BoundaryEvent> postfilter(std::vector<BoundaryEvent> events,
                                             const FrameSimilarityFn& similarity, int frame_count,
                                             const ClassifyParams& params = {}) {
  sort_events(events);
  std::vector<BoundaryEvent> merged;
  std::vector<int> cluster_start;  // earliest member start per surviving event
  for (const BoundaryEvent& ev : events) {
    if (!merged.empty() && ev.start - merged.back().end < params.min_gap) {
      if (ev.confidence > merged.back().confidence) merged.back() = ev;
      continue;
    }
    merged.push_back(ev);
    cluster_start.push_back(ev.start);
  }
  std::vector<BoundaryEvent> out;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const BoundaryEvent& ev = merged[i];
    bool drop = false;
    if (ev.kind == EventKind::Cut && similarity) {
      const int old_end = cluster_start[i] - 1;
      for (int j = 1; j <= params.flash_window && !drop; ++j) {
        const int ahead = ev.start + j;
        if (old_end >= 0 && ahead < frame_count && similarity(old_end, ahead) < params.flash_sim) {
          drop = true;
        }
        const int before = old_end - j;
        if (before >= 0 && similarity(ev.start, before) < params.flash_sim) {
          drop = true;
        }
      }
    }
    if (!drop) out.push_back(ev);
  }
  return out;
}

}  // namespace sbd
