#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sbd/classify.hpp"
#include "sbd/error.hpp"
#include "sbd/evaluate.hpp"
#include "sbd/events.hpp"
#include "sbd/gbdt.hpp"
#include "sbd/metrics.hpp"
#include "sbd/rng.hpp"

namespace sbd {

enum class Label { None, Cut, Gradual };

struct LabeledSample {
  FeatureVector x;
  Label label = Label::None;
  std::string video_id;
  int frame = 0;
};

// Label every frame from the annotations (cut at the annotated frame,
// gradual across each span, none elsewhere), then thin the negatives to
// negative_subsample_ratio per positive. Positives are never dropped and
// retained samples keep frame order, so training stays deterministic.
inline std::vector<LabeledSample> assemble_dataset(const std::vector<FeatureVector>& features,
                                                   const std::vector<BoundaryEvent>& annotations,
                                                   const std::string& video_id,
                                                   const TrainParams& params) {
  const int n = int(features.size());
  if (annotations.empty()) {
    raise(Errc::EmptyAnnotation, "video '" + video_id + "' has no annotated events");
  }
  std::vector<Label> labels(std::size_t(n), Label::None);
  for (const BoundaryEvent& ev : annotations) {
    if (ev.start < 0 || ev.end >= n) {
      raise(Errc::AnnotationOutOfRange, "event at frame " + std::to_string(ev.start) +
                                            " outside video '" + video_id + "' of " +
                                            std::to_string(n) + " frames");
    }
    if (ev.kind == EventKind::Cut) {
      labels[std::size_t(ev.start)] = Label::Cut;
    } else {
      for (int t = ev.start; t <= ev.end; ++t) labels[std::size_t(t)] = Label::Gradual;
    }
  }
  std::vector<int> negatives;
  std::size_t positives = 0;
  for (int t = 0; t < n; ++t) {
    if (labels[std::size_t(t)] == Label::None) {
      negatives.push_back(t);
    } else {
      ++positives;
    }
  }
  const std::size_t keep = std::min(
      negatives.size(), std::size_t(params.negative_subsample_ratio * double(positives) + 0.5));
  SplitMix64 rng(mix_seed(params.seed, fnv1a64(video_id)));
  // partial Fisher-Yates, then restore frame order among the kept ones
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.next_below(negatives.size() - i);
    std::swap(negatives[i], negatives[j]);
  }
  negatives.resize(keep);
  std::sort(negatives.begin(), negatives.end());

  std::vector<bool> take(std::size_t(n), false);
  for (int t : negatives) take[std::size_t(t)] = true;
  std::vector<LabeledSample> out;
  out.reserve(positives + keep);
  for (int t = 0; t < n; ++t) {
    if (labels[std::size_t(t)] != Label::None || take[std::size_t(t)]) {
      out.push_back(LabeledSample{features[std::size_t(t)], labels[std::size_t(t)], video_id, t});
    }
  }
  return out;
}

inline const char* label_name(Label l) {
  switch (l) {
    case Label::None: return "none";
    case Label::Cut: return "cut";
    case Label::Gradual: return "gradual";
  }
  return "?";
}

// feature CSV plus a trailing label column
inline void write_dataset_csv(std::ostream& out, const FeatureSchema& schema,
                              const std::vector<LabeledSample>& samples) {
  out << "frame_index";
  for (const std::string& name : schema.names()) out << ",\"" << name << "\"";
  out << ",label\n";
  char buf[64];
  for (const LabeledSample& s : samples) {
    out << s.frame;
    for (double v : s.x.values) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << ',' << buf;
    }
    out << ',' << label_name(s.label) << '\n';
  }
}

// One-vs-rest training for a single class tag.
inline GbdtModel train_gbdt(const std::vector<LabeledSample>& samples, Label target,
                            const FeatureSchema& schema, const TrainParams& params,
                            TrainTrace* trace = nullptr) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(samples.size());
  y.reserve(samples.size());
  for (const LabeledSample& s : samples) {
    x.push_back(s.x.values);
    y.push_back(s.label == target ? 1 : 0);
  }
  return train_gbdt_binary(x, y, schema, target == Label::Cut ? "cut" : "gradual", params, trace);
}

// Everything the trainer and evaluator need to know about one video.
struct VideoData {
  std::string id;
  std::vector<FeatureVector> features;    // all frames, in order
  std::vector<BoundaryEvent> truth;
  std::vector<Histogram> luma_histograms; // optional; enables flash suppression
};

struct TrainedModels {
  GbdtModel cut;
  GbdtModel gradual;
  bool has_gradual = false;
};

inline TrainedModels train_models(const std::vector<const VideoData*>& videos,
                                  const FeatureSchema& schema, const TrainParams& params) {
  std::vector<LabeledSample> samples;
  for (const VideoData* v : videos) {
    auto part = assemble_dataset(v->features, v->truth, v->id, params);
    samples.insert(samples.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  TrainedModels models;
  models.cut = train_gbdt(samples, Label::Cut, schema, params);
  const bool any_gradual = std::any_of(samples.begin(), samples.end(), [](const LabeledSample& s) {
    return s.label == Label::Gradual;
  });
  if (any_gradual) {
    models.gradual = train_gbdt(samples, Label::Gradual, schema, params);
    models.has_gradual = true;
  }
  return models;
}

inline std::vector<BoundaryEvent> detect_video(const VideoData& video, const FeatureSchema& schema,
                                               const TrainedModels& models,
                                               const ClassifyParams& cparams) {
  std::vector<BoundaryEvent> events =
      classify_stream(video.features, schema, models.cut,
                      models.has_gradual ? &models.gradual : nullptr, cparams);
  FrameSimilarityFn sim;
  if (!video.luma_histograms.empty()) sim = histogram_similarity(video.luma_histograms);
  return postfilter(std::move(events), sim, int(video.features.size()), cparams);
}

struct CvFold {
  std::vector<std::string> held_out;
  EvalReport report;
};

struct CvResult {
  std::vector<CvFold> folds;
  double mean_f1 = 0.0;
};

// k-fold cross-validation grouped by video id: every frame of a video lands
// in exactly one fold, so no video leaks between train and test roles.
inline CvResult cross_validate(const std::vector<VideoData>& videos, const FeatureSchema& schema,
                               const TrainParams& params, int k,
                               const ClassifyParams& cparams = {}, int tol = 2) {
  if (k < 2) raise(Errc::InvalidSpec, "k must be at least 2");
  std::vector<std::string> ids;
  for (const VideoData& v : videos) ids.push_back(v.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (int(ids.size()) < k) raise(Errc::TooFewGroups, "need at least k distinct video ids");

  std::map<std::string, int> fold_of;
  for (std::size_t i = 0; i < ids.size(); ++i) fold_of[ids[i]] = int(i % std::size_t(k));

  CvResult result;
  double f1_sum = 0.0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<const VideoData*> train_videos;
    std::vector<const VideoData*> test_videos;
    for (const VideoData& v : videos) {
      (fold_of[v.id] == fold ? test_videos : train_videos).push_back(&v);
    }
    const TrainedModels models = train_models(train_videos, schema, params);
    CvFold out;
    EvalReport merged;
    bool first = true;
    for (const VideoData* v : test_videos) {
      out.held_out.push_back(v->id);
      auto events = detect_video(*v, schema, models, cparams);
      const EvalReport r = score(match_events(v->truth, events, tol));
      merged = first ? r : merge_reports(merged, r);
      first = false;
    }
    out.report = merged;
    f1_sum += merged.overall_scores.f1;
    result.folds.push_back(std::move(out));
  }
  result.mean_f1 = f1_sum / double(k);
  return result;
}

}  // namespace sbd
