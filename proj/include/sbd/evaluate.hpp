#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbd/error.hpp"
#include "sbd/events.hpp"

namespace sbd {

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct Matching {
  MatchCounts overall;
  MatchCounts cuts;      // same-kind matches only; mismatches count as FP/FN here
  MatchCounts graduals;
  int kind_mismatches = 0;
  std::vector<std::pair<int, int>> pairs;  // (gt index, pred index)
};

namespace detail {

inline void check_sorted(const std::vector<BoundaryEvent>& events, const char* which) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (event_order(events[i], events[i - 1])) {
      raise(Errc::UnsortedInput, std::string(which) + " events are not sorted");
    }
  }
}

}  // namespace detail

// One-to-one greedy matching in increasing frame order. A predicted event
// matches an unmatched ground-truth event when the prediction's span
// intersects the truth's span expanded by tol frames (for two cuts this is
// |frame difference| <= tol). Kind mismatches still count as matches for
// the overall scores and are tallied separately.
inline Matching match_events(const std::vector<BoundaryEvent>& gt,
                             const std::vector<BoundaryEvent>& pred, int tol = 2) {
  detail::check_sorted(gt, "ground-truth");
  detail::check_sorted(pred, "predicted");
  Matching m;
  std::vector<bool> gt_used(gt.size(), false);
  for (std::size_t p = 0; p < pred.size(); ++p) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt_used[g]) continue;
      if (pred[p].start <= gt[g].end + tol && pred[p].end >= gt[g].start - tol) {
        gt_used[g] = true;
        m.pairs.emplace_back(int(g), int(p));
        ++m.overall.tp;
        if (gt[g].kind != pred[p].kind) {
          ++m.kind_mismatches;
        } else if (gt[g].kind == EventKind::Cut) {
          ++m.cuts.tp;
        } else {
          ++m.graduals.tp;
        }
        break;
      }
    }
  }
  const auto count_kind = [](const std::vector<BoundaryEvent>& evs, EventKind k) {
    return int(std::count_if(evs.begin(), evs.end(),
                             [k](const BoundaryEvent& e) { return e.kind == k; }));
  };
  m.overall.fp = int(pred.size()) - m.overall.tp;
  m.overall.fn = int(gt.size()) - m.overall.tp;
  m.cuts.fp = count_kind(pred, EventKind::Cut) - m.cuts.tp;
  m.cuts.fn = count_kind(gt, EventKind::Cut) - m.cuts.tp;
  m.graduals.fp = count_kind(pred, EventKind::Gradual) - m.graduals.tp;
  m.graduals.fn = count_kind(gt, EventKind::Gradual) - m.graduals.tp;
  return m;
}

struct Scores {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 0.0;
};

// precision/recall treat 0/0 as 1 (correct silence); F1 treats 0/0 as 0
inline Scores compute_scores(const MatchCounts& c) {
  Scores s;
  s.precision = (c.tp + c.fp) == 0 ? 1.0 : double(c.tp) / double(c.tp + c.fp);
  s.recall = (c.tp + c.fn) == 0 ? 1.0 : double(c.tp) / double(c.tp + c.fn);
  s.f1 = (s.precision + s.recall) == 0.0 ? 0.0
                                         : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

struct EvalReport {
  MatchCounts overall, cuts, graduals;
  int kind_mismatches = 0;
  Scores overall_scores, cut_scores, gradual_scores;
  double fps = 0.0;
};

inline EvalReport score(const Matching& m) {
  EvalReport r;
  r.overall = m.overall;
  r.cuts = m.cuts;
  r.graduals = m.graduals;
  r.kind_mismatches = m.kind_mismatches;
  r.overall_scores = compute_scores(m.overall);
  r.cut_scores = compute_scores(m.cuts);
  r.gradual_scores = compute_scores(m.graduals);
  return r;
}

inline double throughput(std::int64_t frame_count, double elapsed_seconds) {
  if (!(elapsed_seconds > 0.0)) raise(Errc::ZeroElapsed, "elapsed time must be positive");
  return double(frame_count) / elapsed_seconds;
}

// counts merge additively across videos; scores are recomputed
inline MatchCounts merge_counts(const MatchCounts& a, const MatchCounts& b) {
  return MatchCounts{a.tp + b.tp, a.fp + b.fp, a.fn + b.fn};
}

inline EvalReport merge_reports(const EvalReport& a, const EvalReport& b) {
  EvalReport r;
  r.overall = merge_counts(a.overall, b.overall);
  r.cuts = merge_counts(a.cuts, b.cuts);
  r.graduals = merge_counts(a.graduals, b.graduals);
  r.kind_mismatches = a.kind_mismatches + b.kind_mismatches;
  r.overall_scores = compute_scores(r.overall);
  r.cut_scores = compute_scores(r.cuts);
  r.gradual_scores = compute_scores(r.graduals);
  r.fps = a.fps;
  return r;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  auto counts = [](const MatchCounts& c, const Scores& s) {
    return nlohmann::json{{"tp", c.tp},           {"fp", c.fp},
                          {"fn", c.fn},           {"precision", s.precision},
                          {"recall", s.recall},   {"f1", s.f1}};
  };
  return nlohmann::json{{"overall", counts(r.overall, r.overall_scores)},
                        {"cut", counts(r.cuts, r.cut_scores)},
                        {"gradual", counts(r.graduals, r.gradual_scores)},
                        {"kind_mismatches", r.kind_mismatches},
                        {"fps", r.fps}};
}

// aligned plain-text table: Method | Speed (FPS) | F score | Precision | Recall
inline void write_report_table(std::ostream& out,
                               const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t name_width = std::string("Method").size();
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %11s  %8s  %9s  %8s\n", int(name_width), "Method",
                "Speed (FPS)", "F score", "Precision", "Recall");
  out << buf;
  for (const auto& [name, r] : rows) {
    if (r.fps > 0.0) {
      std::snprintf(buf, sizeof buf, "%-*s  %11.1f  %8.4f  %9.4f  %8.4f\n", int(name_width),
                    name.c_str(), r.fps, r.overall_scores.f1, r.overall_scores.precision,
                    r.overall_scores.recall);
    } else {
      std::snprintf(buf, sizeof buf, "%-*s  %11s  %8.4f  %9.4f  %8.4f\n", int(name_width),
                    name.c_str(), "-", r.overall_scores.f1, r.overall_scores.precision,
                    r.overall_scores.recall);
    }
    out << buf;
  }
}

}  // namespace sbd
