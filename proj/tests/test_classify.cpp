#include <doctest.h>

#include <cmath>

#include "sbd/classify.hpp"
#include "test_util.hpp"

using namespace sbd;

TEST_CASE("fixed threshold classifier") {
  SUBCASE("silent track") {
    std::vector<double> track(100, 0.0);
    CHECK(threshold_classify(track, 0.5).empty());
  }
  SUBCASE("single spike") {
    std::vector<double> track(100, 0.0);
    track[50] = 0.9;
    const auto events = threshold_classify(track, 0.5);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::Cut);
    CHECK(events[0].start == 50);
    CHECK(events[0].confidence == doctest::Approx(0.9));
  }
  SUBCASE("plateau emits one cut at its first frame") {
    // enumerate candidates: only the first of the two equal supra-threshold
    // values passes the rise/fall rule
    std::vector<double> track{0.0, 0.1, 0.8, 0.8, 0.1, 0.0};
    const auto events = threshold_classify(track, 0.5);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start == 2);
  }
  SUBCASE("spike at either edge of the track") {
    std::vector<double> track{0.9, 0.1, 0.0, 0.1, 0.9};
    const auto events = threshold_classify(track, 0.5);
    REQUIRE(events.size() == 2);
    CHECK(events[0].start == 0);
    CHECK(events[1].start == 4);
  }
  SUBCASE("confidence saturates at 1") {
    std::vector<double> track{0.0, 1.0, 0.0};
    const auto events = threshold_classify(track, 0.1);
    REQUIRE(events.size() == 1);
    CHECK(events[0].confidence == 1.0);
  }
}

TEST_CASE("adaptive threshold classifier") {
  SUBCASE("constant track yields nothing") {
    std::vector<double> track(60, 0.3);
    CHECK(adaptive_threshold_classify(track, 8, 3.0, 0.05).empty());
  }
  SUBCASE("unit spike in a zero track") {
    std::vector<double> track(60, 0.0);
    track[30] = 1.0;
    const auto events = adaptive_threshold_classify(track, 8, 3.0, 0.05);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start == 30);
  }
  SUBCASE("alternating baseline is not flagged, spike is") {
    // baseline alternates 0.1/0.2: window mean 0.15, population std 0.05;
    // mean + 3*std = 0.30 clears the baseline but not the 0.9 spike
    std::vector<double> track(64);
    for (int t = 0; t < 64; ++t) track[std::size_t(t)] = (t % 2) ? 0.2 : 0.1;
    track[32] = 0.9;
    const auto events = adaptive_threshold_classify(track, 8, 3.0, 0.05);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start == 32);
  }
  SUBCASE("window must be smaller than the track") {
    std::vector<double> track(10, 0.0);
    try {
      adaptive_threshold_classify(track, 10, 3.0, 0.05);
      FAIL("expected WindowTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::WindowTooLarge);
    }
  }
}

static FeatureSchema tiny_schema() {
  return FeatureSchema({"f0", "f1"});
}

static GbdtModel stump_model(const FeatureSchema& schema, const std::string& tag, int feature,
                             double threshold, double left, double right) {
  GbdtModel m;
  m.class_tag = tag;
  m.learning_rate = 1.0;
  m.base_score = 0.0;
  m.schema_names = schema.names();
  m.schema_hash = schema.hash();
  Tree t;
  t.nodes.push_back(TreeNode{feature, threshold, 1.0, 1, 2, 0.0});
  t.nodes.push_back(TreeNode{-1, 0.0, 0.0, -1, -1, left});
  t.nodes.push_back(TreeNode{-1, 0.0, 0.0, -1, -1, right});
  m.trees.push_back(std::move(t));
  return m;
}

TEST_CASE("gbdt prediction") {
  const FeatureSchema schema = tiny_schema();
  SUBCASE("zero trees, zero base gives one half") {
    GbdtModel m;
    m.schema_names = schema.names();
    m.schema_hash = schema.hash();
    FeatureVector x{0, {0.3, -1.0}};
    CHECK(gbdt_predict(m, x, schema) == 0.5);
  }
  SUBCASE("single leaf of weight w gives logistic(w)") {
    GbdtModel m;
    m.learning_rate = 1.0;
    m.schema_names = schema.names();
    m.schema_hash = schema.hash();
    Tree t;
    t.nodes.push_back(TreeNode{-1, 0.0, 0.0, -1, -1, 1.3});
    m.trees.push_back(t);
    FeatureVector x{0, {0.0, 0.0}};
    CHECK(gbdt_predict(m, x, schema) == doctest::Approx(logistic(1.3)).epsilon(1e-15));
  }
  SUBCASE("depth-1 split routes by threshold") {
    const GbdtModel m = stump_model(schema, "cut", 0, 0.5, -2.0, 2.0);
    FeatureVector hi{0, {0.7, 0.0}};
    FeatureVector lo{0, {0.3, 0.0}};
    CHECK(gbdt_predict(m, hi, schema) == doctest::Approx(logistic(2.0)).epsilon(1e-15));
    CHECK(gbdt_predict(m, hi, schema) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
    CHECK(gbdt_predict(m, lo, schema) == doctest::Approx(logistic(-2.0)).epsilon(1e-15));
  }
  SUBCASE("schema mismatch is rejected") {
    const GbdtModel m = stump_model(schema, "cut", 0, 0.5, -2.0, 2.0);
    const FeatureSchema other({"f0", "f1", "f2"});
    FeatureVector x{0, {0.7, 0.0, 0.0}};
    try {
      gbdt_predict(m, x, other);
      FAIL("expected SchemaMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SchemaMismatch);
    }
  }
  SUBCASE("sign of the pre-logistic score decides p >= 0.5") {
    const GbdtModel m = stump_model(schema, "cut", 0, 0.5, -0.01, 0.01);
    FeatureVector hi{0, {1.0, 0.0}};
    FeatureVector lo{0, {0.0, 0.0}};
    CHECK(m.raw_score(hi.values) > 0.0);
    CHECK(gbdt_predict(m, hi, schema) > 0.5);
    CHECK(m.raw_score(lo.values) < 0.0);
    CHECK(gbdt_predict(m, lo, schema) < 0.5);
  }
  SUBCASE("prediction stays in (0,1) and is monotone in a leaf weight") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      const double w = -8.0 + 16.0 * rng.next_unit();
      GbdtModel m = stump_model(schema, "cut", 0, 0.5, w, w + 0.5);
      const std::vector<double> routed_right{0.9, 0.0};
      const double p = m.predict(routed_right);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      GbdtModel heavier = m;
      heavier.trees[0].nodes[2].weight += 0.25;  // the right leaf
      CHECK(heavier.predict(routed_right) > p);
    }
  }
}

// features: f0 drives the cut model, f1 drives the gradual model
static std::vector<FeatureVector> tracks_to_features(const std::vector<double>& cut_track,
                                                     const std::vector<double>& grad_track) {
  std::vector<FeatureVector> out;
  for (std::size_t t = 0; t < cut_track.size(); ++t) {
    out.push_back(FeatureVector{int(t), {cut_track[t], grad_track[t]}});
  }
  return out;
}

TEST_CASE("stream classification") {
  const FeatureSchema schema = tiny_schema();
  // p >= 0.5 exactly when the driving feature >= 0.5
  const GbdtModel cut_model = stump_model(schema, "cut", 0, 0.5, -4.0, 4.0);
  const GbdtModel grad_model = stump_model(schema, "gradual", 1, 0.5, -4.0, 4.0);

  SUBCASE("all probabilities low yields nothing") {
    const auto features = tracks_to_features(std::vector<double>(50, 0.0),
                                             std::vector<double>(50, 0.0));
    CHECK(classify_stream(features, schema, cut_model, &grad_model).empty());
  }
  SUBCASE("single cut at frame 100") {
    std::vector<double> cut_track(200, 0.1);
    cut_track[100] = 0.9;
    const auto features = tracks_to_features(cut_track, std::vector<double>(200, 0.0));
    const auto events = classify_stream(features, schema, cut_model, &grad_model);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::Cut);
    CHECK(events[0].start == 100);
  }
  SUBCASE("gradual run becomes one event spanning the run") {
    std::vector<double> grad_track(100, 0.0);
    for (int t = 40; t <= 55; ++t) grad_track[std::size_t(t)] = 0.8;
    const auto features = tracks_to_features(std::vector<double>(100, 0.0), grad_track);
    const auto events = classify_stream(features, schema, cut_model, &grad_model);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::Gradual);
    CHECK(events[0].start == 40);
    CHECK(events[0].end == 55);
  }
  SUBCASE("single-frame gradual run is dropped") {
    std::vector<double> grad_track(100, 0.0);
    grad_track[40] = 0.9;
    const auto features = tracks_to_features(std::vector<double>(100, 0.0), grad_track);
    CHECK(classify_stream(features, schema, cut_model, &grad_model).empty());
  }
  SUBCASE("cut inside a gradual run takes precedence and splits it") {
    std::vector<double> cut_track(100, 0.0);
    std::vector<double> grad_track(100, 0.0);
    for (int t = 40; t <= 49; ++t) grad_track[std::size_t(t)] = 0.8;
    cut_track[44] = 0.9;
    const auto features = tracks_to_features(cut_track, grad_track);
    const auto events = classify_stream(features, schema, cut_model, &grad_model);
    REQUIRE(events.size() == 3);
    CHECK(events[0] == BoundaryEvent::gradual(40, 43));
    CHECK(events[1] == BoundaryEvent::cut(44));
    CHECK(events[2] == BoundaryEvent::gradual(45, 49));
  }
  SUBCASE("events are sorted and non-overlapping") {
    SplitMix64 rng(7);
    std::vector<double> cut_track(300), grad_track(300);
    for (int t = 0; t < 300; ++t) {
      cut_track[std::size_t(t)] = rng.next_unit();
      grad_track[std::size_t(t)] = rng.next_unit();
    }
    const auto features = tracks_to_features(cut_track, grad_track);
    const auto events = classify_stream(features, schema, cut_model, &grad_model);
    for (std::size_t i = 1; i < events.size(); ++i) {
      CHECK(events[i].start > events[i - 1].end);
    }
    for (const auto& ev : events) {
      if (ev.kind == EventKind::Gradual) CHECK(ev.length() >= 2);
    }
  }
}

TEST_CASE("postfilter") {
  ClassifyParams params;
  const FrameSimilarityFn no_sim;  // disables flash suppression

  SUBCASE("close events merge keeping the higher confidence") {
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(100, 0.6), BoundaryEvent::cut(104, 0.9)};
    const auto out = postfilter(events, no_sim, 1000, params);
    REQUIRE(out.size() == 1);
    CHECK(out[0].start == 104);
    CHECK(out[0].confidence == 0.9);
  }
  SUBCASE("ties keep the earlier event") {
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(100, 0.7), BoundaryEvent::cut(104, 0.7)};
    const auto out = postfilter(events, no_sim, 1000, params);
    REQUIRE(out.size() == 1);
    CHECK(out[0].start == 100);
  }
  SUBCASE("distant events survive") {
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(100, 0.6), BoundaryEvent::cut(200, 0.9)};
    CHECK(postfilter(events, no_sim, 1000, params).size() == 2);
  }
  SUBCASE("flash-onset cut is dropped when content returns to baseline") {
    // frames 0..9, flash at frame 5: frame 4 and frame 6 near-identical
    auto sim = [](int a, int b) { return (a == 4 && b == 6) ? 0.0 : 1.0; };
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(5, 0.9)};
    CHECK(postfilter(events, sim, 10, params).empty());
  }
  SUBCASE("flash-decay cut is dropped when the new content predates the event") {
    // flash at frame 5, candidate fires at 6: frame 6 matches frame 4
    auto sim = [](int a, int b) { return (a == 6 && b == 4) ? 0.0 : 1.0; };
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(6, 0.9)};
    CHECK(postfilter(events, sim, 10, params).empty());
  }
  SUBCASE("genuine cut with new content is retained") {
    auto sim = [](int, int) { return 1.0; };
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(5, 0.9)};
    CHECK(postfilter(events, sim, 10, params).size() == 1);
  }
  SUBCASE("flash checks stay inside the stream at both edges") {
    auto sim = [](int, int) { return 1.0; };
    std::vector<BoundaryEvent> events{BoundaryEvent::cut(0, 0.9), BoundaryEvent::cut(9, 0.8)};
    // nothing is similar, so both survive and no out-of-range frame is probed
    ClassifyParams wide = params;
    wide.min_gap = 5;
    CHECK(postfilter(events, sim, 10, wide).size() == 2);
  }
  SUBCASE("never increases the event count, never moves survivors") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<BoundaryEvent> events;
      const int n = int(rng.next_below(12));
      for (int i = 0; i < n; ++i) {
        events.push_back(
            BoundaryEvent::cut(int(rng.next_below(300)), rng.next_unit()));
      }
      sort_events(events);
      auto sim = [&rng](int, int) { return rng.next_unit(); };
      const auto out = postfilter(events, sim, 300, params);
      CHECK(out.size() <= events.size());
      for (const auto& ev : out) {
        CHECK(std::find(events.begin(), events.end(), ev) != events.end());
      }
    }
  }
}

TEST_CASE("model json roundtrip preserves predictions bitwise") {
  const FeatureSchema schema = tiny_schema();
  GbdtModel m = stump_model(schema, "cut", 0, 1.0 / 3.0, -0.123456789123456789, 2.71828182845905);
  m.base_score = -1.6094379124341003;
  m.learning_rate = 0.1;
  const nlohmann::json j = model_to_json(m);
  const GbdtModel back = model_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.class_tag == m.class_tag);
  CHECK(back.schema_hash == m.schema_hash);
  SplitMix64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    FeatureVector x{0, {rng.next_unit(), rng.next_unit()}};
    CHECK(m.predict(x.values) == back.predict(x.values));
  }
}
