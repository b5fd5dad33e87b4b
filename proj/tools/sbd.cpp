// sbd: shot boundary detection toolkit
//
// Subcommands: detect, train, eval, candidates, votes, synth, features.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbd/sbd.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// frame sources
// ---------------------------------------------------------------------------

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<sbd::Frame> next() = 0;
};

class Y4mSource : public FrameSource {
 public:
  explicit Y4mSource(const std::string& path) {
    if (path == "-") {
      reader_.emplace(std::cin);
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) sbd::raise(sbd::Errc::IoError, "cannot open " + path);
      reader_.emplace(file_);
    }
  }
  std::optional<sbd::Frame> next() override { return reader_->next(); }

 private:
  std::ifstream file_;
  std::optional<sbd::Y4mReader> reader_;
};

class ImageSource : public FrameSource {
 public:
  explicit ImageSource(const std::string& pattern) : reader_(pattern) {}
  std::optional<sbd::Frame> next() override { return reader_.next(); }

 private:
  sbd::ImageSequenceReader reader_;
};

std::unique_ptr<FrameSource> open_source(const std::string& input) {
  namespace fs = std::filesystem;
  if (input == "-" || input.ends_with(".y4m")) return std::make_unique<Y4mSource>(input);
  if (fs::is_directory(input) || input.find('*') != std::string::npos ||
      input.ends_with(".ppm") || input.ends_with(".pgm") || input.ends_with(".pnm")) {
    return std::make_unique<ImageSource>(input);
  }
  if (!fs::exists(input)) sbd::raise(sbd::Errc::IoError, "no such input: " + input);
  return std::make_unique<Y4mSource>(input);
}

struct FeaturePass {
  sbd::FeatureSchema schema;
  std::vector<sbd::FeatureVector> features;
  std::vector<sbd::Histogram> luma_hists;
  int frames = 0;
  double elapsed = 0.0;
};

FeaturePass run_feature_pass(FrameSource& source, const sbd::MetricsConfig& cfg) {
  const auto start = Clock::now();
  sbd::FeaturePipeline pipeline(cfg);
  FeaturePass out;
  while (auto frame = source.next()) {
    for (auto& fv : pipeline.push(std::move(*frame))) out.features.push_back(std::move(fv));
  }
  for (auto& fv : pipeline.finish()) out.features.push_back(std::move(fv));
  out.schema = pipeline.schema();
  out.luma_hists = pipeline.luma_histograms();
  out.frames = pipeline.frame_count();
  out.elapsed = seconds_since(start);
  return out;
}

std::vector<sbd::BoundaryEvent> read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) sbd::raise(sbd::Errc::IoError, "cannot open " + path);
  return sbd::read_events(in);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) sbd::raise(sbd::Errc::IoError, "cannot write " + path);
  return out;
}

void add_metric_options(CLI::App* cmd, sbd::MetricsConfig& cfg) {
  cmd->add_option("--stats-grid", cfg.stats_grid, "block grid for the mean/std metric");
  cmd->add_option("--cum-grid", cfg.cum_grid, "block grid for the cumulative edge histogram");
  cmd->add_option("--cum-bins", cfg.cum_bins, "bins for the cumulative edge histogram");
  cmd->add_option("--color-bins", cfg.color_bins, "bins per channel for the color diff vector");
  cmd->add_option("--luma-bins", cfg.luma_bins, "luma bins for the Bhattacharyya metric");
  cmd->add_option("--edge-thresh", cfg.edge_thresh, "edge magnitude threshold (0-255)");
  cmd->add_option("--block-thresh", cfg.block_thresh, "edge block density threshold");
  cmd->add_option("--window-radius", cfg.window_radius, "temporal context radius in frames");
}

int metric_track_index(const sbd::FeatureSchema& schema, const std::string& metric) {
  const int idx = schema.index_of(metric + "[t-1,t]");
  if (idx < 0) {
    sbd::raise(sbd::Errc::ParseError,
               "unknown metric '" + metric +
                   "' (expected blockmean, blockstd, cumedge, edgeblock, bhattacharyya, content)");
  }
  return idx;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string output;
  std::string cut_model, grad_model;
  double threshold = -1.0;
  bool adaptive = false;
  std::string metric = "blockmean";
  int window = 30;
  double k = 3.0;
  double floor = 0.05;
  sbd::MetricsConfig metrics;
  sbd::ClassifyParams classify;
  bool no_postfilter = false;
};

int run_detect(const DetectArgs& args) {
  const int modes = int(!args.cut_model.empty()) + int(args.threshold >= 0.0) +
                    int(args.adaptive);
  if (modes != 1) {
    std::cerr << "detect: choose exactly one of --cut-model, --threshold, --adaptive\n";
    return 1;
  }
  auto source = open_source(args.input);
  FeaturePass pass = run_feature_pass(*source, args.metrics);
  const auto classify_start = Clock::now();

  std::vector<sbd::BoundaryEvent> events;
  if (!args.cut_model.empty()) {
    const sbd::GbdtModel cut = sbd::load_model(args.cut_model);
    std::optional<sbd::GbdtModel> grad;
    if (!args.grad_model.empty()) grad = sbd::load_model(args.grad_model);
    events = sbd::classify_stream(pass.features, pass.schema, cut, grad ? &*grad : nullptr,
                                  args.classify);
  } else {
    const int track_idx = metric_track_index(pass.schema, args.metric);
    std::vector<double> track;
    track.reserve(pass.features.size());
    for (const auto& fv : pass.features) track.push_back(fv.values[std::size_t(track_idx)]);
    events = args.adaptive
                 ? sbd::adaptive_threshold_classify(track, args.window, args.k, args.floor)
                 : sbd::threshold_classify(track, args.threshold);
  }
  if (!args.no_postfilter) {
    events = sbd::postfilter(std::move(events), sbd::histogram_similarity(pass.luma_hists),
                             pass.frames, args.classify);
  }

  const double elapsed = pass.elapsed + seconds_since(classify_start);
  if (args.output.empty() || args.output == "-") {
    sbd::write_detections(std::cout, events);
  } else {
    auto out = open_output(args.output);
    sbd::write_detections(out, events);
  }
  const double fps = elapsed > 0.0 ? sbd::throughput(pass.frames, elapsed) : 0.0;
  std::cout << "processed " << pass.frames << " frames in " << elapsed << " s: " << fps
            << " fps, " << events.size() << " events\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> videos;
  std::vector<std::string> annotations;
  std::string cut_out, grad_out;
  std::string dump_dataset;
  sbd::MetricsConfig metrics;
  sbd::TrainParams params;
  int cv_folds = 0;
  int importance = 0;
};

int run_train(const TrainArgs& args) {
  if (args.videos.empty() || args.videos.size() != args.annotations.size()) {
    std::cerr << "train: need matching --video/--ann pairs\n";
    return 1;
  }
  std::vector<sbd::VideoData> videos;
  sbd::FeatureSchema schema;
  for (std::size_t i = 0; i < args.videos.size(); ++i) {
    auto source = open_source(args.videos[i]);
    FeaturePass pass = run_feature_pass(*source, args.metrics);
    schema = pass.schema;
    sbd::VideoData v;
    v.id = args.videos[i];
    v.features = std::move(pass.features);
    v.luma_histograms = std::move(pass.luma_hists);
    v.truth = read_events_file(args.annotations[i]);
    std::cerr << "featurized " << v.id << ": " << pass.frames << " frames, " << v.truth.size()
              << " events\n";
    videos.push_back(std::move(v));
  }

  if (args.cv_folds > 1) {
    const sbd::CvResult cv = sbd::cross_validate(videos, schema, args.params, args.cv_folds);
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
      std::cout << "fold " << f << ": f1=" << cv.folds[f].report.overall_scores.f1 << " (held out";
      for (const auto& id : cv.folds[f].held_out) std::cout << ' ' << id;
      std::cout << ")\n";
    }
    std::cout << "mean f1: " << cv.mean_f1 << "\n";
  }

  if (!args.dump_dataset.empty()) {
    std::vector<sbd::LabeledSample> samples;
    for (const auto& v : videos) {
      auto part = sbd::assemble_dataset(v.features, v.truth, v.id, args.params);
      samples.insert(samples.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
    auto out = open_output(args.dump_dataset);
    sbd::write_dataset_csv(out, schema, samples);
    std::cerr << "dumped " << samples.size() << " labeled samples to " << args.dump_dataset
              << "\n";
  }

  std::vector<const sbd::VideoData*> refs;
  for (const auto& v : videos) refs.push_back(&v);
  const sbd::TrainedModels models = sbd::train_models(refs, schema, args.params);
  if (!args.cut_out.empty()) {
    sbd::save_model(args.cut_out, models.cut);
    std::cout << "wrote cut model (" << models.cut.trees.size() << " trees) to " << args.cut_out
              << "\n";
  }
  if (!args.grad_out.empty()) {
    if (models.has_gradual) {
      sbd::save_model(args.grad_out, models.gradual);
      std::cout << "wrote gradual model (" << models.gradual.trees.size() << " trees) to "
                << args.grad_out << "\n";
    } else {
      std::cerr << "no gradual events in the training data, gradual model not written\n";
    }
  }
  if (args.importance > 0) {
    const auto ranked = sbd::feature_importance(models.cut);
    std::cout << "cut model feature importance (total split gain):\n";
    for (int i = 0; i < args.importance && i < int(ranked.size()); ++i) {
      if (ranked[std::size_t(i)].second <= 0.0) break;
      std::cout << "  " << ranked[std::size_t(i)].first << "  " << ranked[std::size_t(i)].second
                << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gt, pred;
  int tol = 2;
  double fps = 0.0;
  std::string name = "detected";
  bool json = false;
};

int run_eval(const EvalArgs& args) {
  const auto gt = read_events_file(args.gt);
  const auto pred = read_events_file(args.pred);
  sbd::EvalReport report = sbd::score(sbd::match_events(gt, pred, args.tol));
  report.fps = args.fps;
  if (args.json) {
    std::cout << sbd::report_to_json(report).dump(2) << "\n";
  } else {
    sbd::write_report_table(std::cout, {{args.name, report}});
    std::cout << "kind mismatches: " << report.kind_mismatches << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// candidates / votes
// ---------------------------------------------------------------------------

struct CandidatesArgs {
  std::vector<std::string> detections;
  std::string video_id;
  int video_length = 0;
  int min_separation = 40;
  int span = 40;
  std::string output;
};

int run_candidates(const CandidatesArgs& args) {
  std::vector<std::vector<int>> outputs;
  for (const auto& path : args.detections) {
    std::ifstream in(path);
    if (!in) sbd::raise(sbd::Errc::IoError, "cannot open " + path);
    std::vector<int> frames;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      long frame;
      if (ls >> frame) frames.push_back(int(frame));
    }
    outputs.push_back(std::move(frames));
  }
  const auto segments = sbd::merge_candidates(outputs, args.video_id, args.video_length,
                                              args.min_separation, args.span);
  if (args.output.empty() || args.output == "-") {
    sbd::write_task_manifest(std::cout, segments);
  } else {
    auto out = open_output(args.output);
    sbd::write_task_manifest(out, segments);
  }
  std::cerr << segments.size() << " candidate segments\n";
  return 0;
}

struct VotesArgs {
  std::string votes;
  int min_votes = 5;
  int margin = 2;
  std::string output;
  std::string status_out;
};

int run_votes(const VotesArgs& args) {
  std::ifstream in(args.votes);
  if (!in) sbd::raise(sbd::Errc::IoError, "cannot open " + args.votes);
  const auto grouped = sbd::group_votes(sbd::read_votes_csv(in));
  std::vector<int> accepted;
  std::ostringstream status;
  status << "segment_id,status,yes,no\n";
  for (const auto& [segment_id, votes] : grouped) {
    const sbd::VoteStatus s = sbd::aggregate_votes(votes, args.min_votes, args.margin);
    int yes = 0;
    for (bool v : votes) yes += v ? 1 : 0;
    status << segment_id << ',' << sbd::vote_status_name(s) << ',' << yes << ','
           << int(votes.size()) - yes << "\n";
    if (s == sbd::VoteStatus::Accepted) {
      const auto colon = segment_id.rfind(':');
      if (colon == std::string::npos) {
        sbd::raise(sbd::Errc::ParseError, "segment id without a centre frame: " + segment_id);
      }
      accepted.push_back(std::stoi(segment_id.substr(colon + 1)));
    }
  }
  if (args.output.empty() || args.output == "-") {
    sbd::finalize_annotations(std::cout, accepted);
  } else {
    auto out = open_output(args.output);
    sbd::finalize_annotations(out, accepted);
  }
  if (!args.status_out.empty()) {
    auto out = open_output(args.status_out);
    out << status.str();
  } else {
    std::cerr << status.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth / features
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string manifest;
  std::string output_dir = ".";
};

int run_synth(const SynthArgs& args) {
  std::ifstream in(args.manifest);
  if (!in) sbd::raise(sbd::Errc::IoError, "cannot open " + args.manifest);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    sbd::raise(sbd::Errc::ParseError, std::string("bad manifest: ") + e.what());
  }
  const auto specs = sbd::manifest_from_json(j);
  std::filesystem::create_directories(args.output_dir);
  for (const auto& spec : specs) {
    const sbd::GeneratedSequence g = sbd::generate(spec);
    const auto base = std::filesystem::path(args.output_dir) / spec.name;
    {
      std::ofstream video(base.string() + ".y4m", std::ios::binary);
      if (!video) sbd::raise(sbd::Errc::IoError, "cannot write " + base.string() + ".y4m");
      sbd::write_y4m(video, g.info, g.frames);
    }
    {
      auto ann = open_output(base.string() + ".txt");
      sbd::write_annotations(ann, g.truth);
    }
    std::cout << spec.name << ": " << g.frames.size() << " frames, " << g.truth.size()
              << " events\n";
  }
  return 0;
}

struct FeaturesArgs {
  std::string input;
  std::string output;
  sbd::MetricsConfig metrics;
};

int run_features(const FeaturesArgs& args) {
  auto source = open_source(args.input);
  const FeaturePass pass = run_feature_pass(*source, args.metrics);
  if (args.output.empty() || args.output == "-") {
    sbd::write_features_csv(std::cout, pass.schema, pass.features);
  } else {
    auto out = open_output(args.output);
    sbd::write_features_csv(out, pass.schema, pass.features);
  }
  std::cerr << "wrote " << pass.features.size() << " feature rows (" << pass.schema.size()
            << " columns)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  CLI::App app{"shot boundary detection toolkit"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* cmd_detect = app.add_subcommand("detect", "detect shot boundaries in a video stream");
  cmd_detect->add_option("input", detect.input, "Y4M file, '-' for stdin, or image pattern")
      ->required();
  cmd_detect->add_option("-o,--output", detect.output, "detections file (default stdout)");
  cmd_detect->add_option("--cut-model", detect.cut_model, "trained cut model (JSON)");
  cmd_detect->add_option("--grad-model", detect.grad_model, "trained gradual model (JSON)");
  cmd_detect->add_option("--threshold", detect.threshold, "fixed threshold on --metric");
  cmd_detect->add_flag("--adaptive", detect.adaptive, "adaptive threshold on --metric");
  cmd_detect->add_option("--metric", detect.metric, "scalar metric for threshold modes");
  cmd_detect->add_option("--window", detect.window, "adaptive window size");
  cmd_detect->add_option("--k", detect.k, "adaptive sigma multiplier");
  cmd_detect->add_option("--floor", detect.floor, "adaptive minimum level");
  cmd_detect->add_option("--p-cut", detect.classify.p_cut, "cut probability threshold");
  cmd_detect->add_option("--p-grad", detect.classify.p_grad, "gradual probability threshold");
  cmd_detect->add_option("--min-gap", detect.classify.min_gap, "merge events closer than this");
  cmd_detect->add_option("--flash-window", detect.classify.flash_window, "flash look-ahead");
  cmd_detect->add_option("--flash-sim", detect.classify.flash_sim, "flash similarity bound");
  cmd_detect->add_flag("--no-postfilter", detect.no_postfilter, "skip false-positive filtering");
  add_metric_options(cmd_detect, detect.metrics);

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "train GBDT models from annotated videos");
  cmd_train->add_option("--video", train.videos, "training video (repeatable)")->required();
  cmd_train->add_option("--ann", train.annotations, "annotation file per video (repeatable)")
      ->required();
  cmd_train->add_option("--cut-out", train.cut_out, "output path for the cut model");
  cmd_train->add_option("--grad-out", train.grad_out, "output path for the gradual model");
  cmd_train->add_option("--trees", train.params.n_trees, "boosting rounds");
  cmd_train->add_option("--depth", train.params.max_depth, "max tree depth");
  cmd_train->add_option("--lr", train.params.learning_rate, "learning rate");
  cmd_train->add_option("--min-leaf", train.params.min_samples_leaf, "min samples per leaf");
  cmd_train->add_option("--lambda", train.params.l2_lambda, "L2 leaf regularization");
  cmd_train->add_option("--neg-ratio", train.params.negative_subsample_ratio,
                        "negatives kept per positive");
  cmd_train->add_option("--seed", train.params.seed, "subsampling seed");
  cmd_train->add_option("--cv", train.cv_folds, "grouped cross-validation folds");
  cmd_train->add_option("--importance", train.importance, "print top-N feature importances");
  cmd_train->add_option("--dump-dataset", train.dump_dataset,
                        "write the labeled feature dataset as CSV");
  add_metric_options(cmd_train, train.metrics);

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "score detections against ground truth");
  cmd_eval->add_option("--gt", eval.gt, "ground-truth annotation file")->required();
  cmd_eval->add_option("--pred", eval.pred, "detections file")->required();
  cmd_eval->add_option("--tol", eval.tol, "matching tolerance in frames");
  cmd_eval->add_option("--fps", eval.fps, "throughput to report in the table");
  cmd_eval->add_option("--name", eval.name, "method name in the table");
  cmd_eval->add_flag("--json", eval.json, "emit the JSON report");

  CandidatesArgs candidates;
  auto* cmd_candidates =
      app.add_subcommand("candidates", "merge detector outputs into review segments");
  cmd_candidates->add_option("detections", candidates.detections,
                             "detector output files, one frame ordinal per line")
      ->required();
  cmd_candidates->add_option("--video-id", candidates.video_id, "video identifier")->required();
  cmd_candidates->add_option("--video-length", candidates.video_length, "video length in frames")
      ->required();
  cmd_candidates->add_option("--min-separation", candidates.min_separation,
                             "cluster radius in frames");
  cmd_candidates->add_option("--span", candidates.span, "segment length in frames");
  cmd_candidates->add_option("-o,--output", candidates.output, "manifest CSV (default stdout)");

  VotesArgs votes;
  auto* cmd_votes = app.add_subcommand("votes", "aggregate observer votes into annotations");
  cmd_votes->add_option("--votes", votes.votes, "votes CSV: segment_id,judgment")->required();
  cmd_votes->add_option("--min-votes", votes.min_votes, "quorum");
  cmd_votes->add_option("--margin", votes.margin, "agreement margin");
  cmd_votes->add_option("-o,--output", votes.output, "annotation file (default stdout)");
  cmd_votes->add_option("--status", votes.status_out, "per-segment status CSV");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "materialize a synthetic corpus manifest");
  cmd_synth->add_option("--manifest", synth.manifest, "corpus manifest (JSON)")->required();
  cmd_synth->add_option("-o,--output-dir", synth.output_dir, "output directory");

  FeaturesArgs features;
  auto* cmd_features = app.add_subcommand("features", "dump per-frame metric tracks as CSV");
  cmd_features->add_option("input", features.input, "Y4M file, '-' for stdin, or image pattern")
      ->required();
  cmd_features->add_option("-o,--output", features.output, "CSV path (default stdout)");
  add_metric_options(cmd_features, features.metrics);

  try {
    app.parse(argc, argv);
    if (*cmd_detect) return run_detect(detect);
    if (*cmd_train) return run_train(train);
    if (*cmd_eval) return run_eval(eval);
    if (*cmd_candidates) return run_candidates(candidates);
    if (*cmd_votes) return run_votes(votes);
    if (*cmd_synth) return run_synth(synth);
    if (*cmd_features) return run_features(features);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const sbd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
