#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sbd/evaluate.hpp"
#include "sbd/metrics.hpp"
#include "sbd/synthkit.hpp"
#include "test_util.hpp"

using namespace sbd;

static SequenceSpec two_solid_scenes(TransitionSpec::Kind kind, int d = 0) {
  SequenceSpec seq;
  seq.width = 32;
  seq.height = 32;
  seq.scenes.push_back(SceneSpec{50, SceneSpec::Pattern::Solid, YuvColor{0, 128, 128}});
  seq.scenes.push_back(SceneSpec{50, SceneSpec::Pattern::Solid, YuvColor{255, 128, 128}});
  seq.transitions.push_back(TransitionSpec{kind, d});
  return seq;
}

TEST_CASE("cut generation") {
  const GeneratedSequence g = generate(two_solid_scenes(TransitionSpec::Kind::Cut));
  REQUIRE(g.frames.size() == 100);
  REQUIRE(g.truth.size() == 1);
  CHECK(g.truth[0] == BoundaryEvent::cut(50));
  CHECK(g.frames[48].y() == g.frames[49].y());
  CHECK(g.frames[49].y() != g.frames[50].y());
}

TEST_CASE("dissolve blends linearly") {
  const GeneratedSequence g = generate(two_solid_scenes(TransitionSpec::Kind::Dissolve, 10));
  REQUIRE(g.frames.size() == 110);
  REQUIRE(g.truth.size() == 1);
  CHECK(g.truth[0] == BoundaryEvent::gradual(50, 59));
  for (int j = 1; j <= 10; ++j) {
    const std::uint8_t expected = clamp_round_u8(255.0 * j / 11.0);
    const Frame& f = g.frames[std::size_t(49 + j)];
    for (std::uint8_t s : f.y()) CHECK(s == expected);
  }
}

TEST_CASE("fade passes through black at the midpoint") {
  SequenceSpec seq;
  seq.width = 32;
  seq.height = 32;
  seq.scenes.push_back(SceneSpec{20, SceneSpec::Pattern::Solid, YuvColor{200, 100, 150}});
  seq.scenes.push_back(SceneSpec{20, SceneSpec::Pattern::Solid, YuvColor{180, 90, 90}});
  seq.transitions.push_back(TransitionSpec{TransitionSpec::Kind::Fade, 9});
  const GeneratedSequence g = generate(seq);
  REQUIRE(g.truth.size() == 1);
  CHECK(g.truth[0] == BoundaryEvent::gradual(20, 28));
  // d=9: midpoint is blend step 5, frame 24, exactly black
  const Frame& mid = g.frames[24];
  for (std::uint8_t s : mid.y()) CHECK(s == 0);
  for (std::uint8_t s : mid.u()) CHECK(s == 128);
}

TEST_CASE("wipe sweeps left to right") {
  const GeneratedSequence g = generate(two_solid_scenes(TransitionSpec::Kind::Wipe, 7));
  REQUIRE(g.truth.size() == 1);
  CHECK(g.truth[0] == BoundaryEvent::gradual(50, 56));
  int prev_boundary = -1;
  for (int j = 1; j <= 7; ++j) {
    const Frame& f = g.frames[std::size_t(49 + j)];
    int boundary = 0;
    while (boundary < 32 && f.luma(boundary, 0) == 255) ++boundary;
    CHECK(boundary > prev_boundary);
    prev_boundary = boundary;
    // everything left of the boundary is new scene, right is old
    for (int x = 0; x < 32; ++x) CHECK(f.luma(x, 16) == (x < boundary ? 255 : 0));
  }
}

TEST_CASE("distractors produce no ground truth") {
  SUBCASE("flash") {
    SequenceSpec seq;
    seq.width = 32;
    seq.height = 32;
    seq.scenes.push_back(SceneSpec{30, SceneSpec::Pattern::Solid, YuvColor{60, 128, 128}});
    seq.distractors.push_back(DistractorSpec{DistractorSpec::Kind::Flash, 0, 10, 1, 0.9, 0});
    const GeneratedSequence g = generate(seq);
    CHECK(g.truth.empty());
    // the flash frame is much brighter, neighbours are untouched
    CHECK(g.frames[10].luma(0, 0) > 200);
    CHECK(g.frames[9].luma(0, 0) == 60);
    CHECK(g.frames[11].luma(0, 0) == 60);
    CHECK(g.frames[9].y() == g.frames[11].y());
  }
  SUBCASE("pan over moving blocks") {
    SequenceSpec seq;
    seq.width = 32;
    seq.height = 32;
    seq.scenes.push_back(
        SceneSpec{30, SceneSpec::Pattern::MovingBlocks, YuvColor{40, 128, 128}, 0, 0, 1});
    seq.distractors.push_back(DistractorSpec{DistractorSpec::Kind::Pan, 0, 5, 1, 0.0, 3});
    const GeneratedSequence g = generate(seq);
    CHECK(g.truth.empty());
    CHECK(g.frames[6].y() != g.frames[5].y());
  }
}

TEST_CASE("noise scenes are deterministic per seed") {
  SequenceSpec seq;
  seq.width = 32;
  seq.height = 32;
  seq.seed = 42;
  seq.scenes.push_back(SceneSpec{10, SceneSpec::Pattern::Noise, YuvColor{120, 128, 128}, 7, 20, 0});
  const GeneratedSequence a = generate(seq);
  const GeneratedSequence b = generate(seq);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].y() == b.frames[i].y());
  }
  CHECK(a.frames[0].y() != a.frames[1].y());  // fresh noise every frame
}

TEST_CASE("solid scenes have exactly zero pair metrics") {
  const GeneratedSequence g = generate(two_solid_scenes(TransitionSpec::Kind::Cut));
  const MetricsConfig cfg;
  // within scene 0 every adjacent pair is bit-identical
  for (int t = 5; t < 8; ++t) {
    const PairMetrics pm =
        compute_pair_metrics(g.frames[std::size_t(t)], g.frames[std::size_t(t + 1)], cfg);
    for (double s : pm.scalars) CHECK(s == 0.0);
    for (double v : pm.color_diff) CHECK(v == 0.0);
  }
}

TEST_CASE("invalid specs are rejected") {
  SUBCASE("geometry too small") {
    SequenceSpec seq = two_solid_scenes(TransitionSpec::Kind::Cut);
    seq.width = 16;
    CHECK_THROWS_AS(generate(seq), Error);
  }
  SUBCASE("gradual needs at least 2 frames") {
    CHECK_THROWS_AS(generate(two_solid_scenes(TransitionSpec::Kind::Dissolve, 1)), Error);
  }
  SUBCASE("flash length out of range") {
    SequenceSpec seq = two_solid_scenes(TransitionSpec::Kind::Cut);
    seq.distractors.push_back(DistractorSpec{DistractorSpec::Kind::Flash, 0, 5, 4, 0.9, 0});
    CHECK_THROWS_AS(generate(seq), Error);
  }
  SUBCASE("transition count must match scene count") {
    SequenceSpec seq = two_solid_scenes(TransitionSpec::Kind::Cut);
    seq.transitions.push_back(TransitionSpec{TransitionSpec::Kind::Cut, 0});
    CHECK_THROWS_AS(generate(seq), Error);
  }
}

TEST_CASE("generated streams roundtrip through y4m bit-exactly") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    SequenceSpec seq;
    seq.width = 32 + int(rng.next_below(2)) * 16;
    seq.height = 32;
    seq.seed = rng.next();
    seq.chroma = trial % 2 == 0 ? Chroma::C420 : Chroma::C444;
    seq.scenes.push_back(
        SceneSpec{5, SceneSpec::Pattern::Noise, YuvColor{100, 90, 160}, rng.next(), 30, 0});
    seq.scenes.push_back(SceneSpec{5, SceneSpec::Pattern::Gradient, YuvColor{150, 128, 128}});
    seq.transitions.push_back(TransitionSpec{TransitionSpec::Kind::Cut, 0});
    const GeneratedSequence g = generate(seq);

    std::ostringstream out;
    write_y4m(out, g.info, g.frames);
    std::istringstream in(out.str());
    Y4mReader reader(in);
    for (const Frame& expect : g.frames) {
      auto got = reader.next();
      REQUIRE(got.has_value());
      CHECK(got->index() == expect.index());
      CHECK(got->y() == expect.y());
      CHECK(got->u() == expect.u());
      CHECK(got->v() == expect.v());
    }
    CHECK(!reader.next().has_value());
  }
}

TEST_CASE("ground truth scores perfectly against itself") {
  SequenceSpec seq = two_solid_scenes(TransitionSpec::Kind::Dissolve, 8);
  seq.scenes.push_back(SceneSpec{40, SceneSpec::Pattern::Solid, YuvColor{90, 110, 130}});
  seq.transitions.push_back(TransitionSpec{TransitionSpec::Kind::Cut, 0});
  const GeneratedSequence g = generate(seq);
  // self-match must be exact even at zero tolerance
  const EvalReport r = score(match_events(g.truth, g.truth, 0));
  CHECK(r.overall_scores.f1 == 1.0);
}

TEST_CASE("manifest json parsing") {
  const auto manifest = nlohmann::json::parse(R"({
    "sequences": [
      {
        "name": "demo",
        "width": 48, "height": 32,
        "fps": [30, 1],
        "chroma": "420",
        "seed": 11,
        "scenes": [
          {"length": 40, "pattern": "solid", "color": [80, 100, 160]},
          {"length": 30, "pattern": "noise", "color": [120, 128, 128], "amplitude": 20, "seed": 3},
          {"length": 35, "pattern": "moving_blocks", "color": [60, 128, 128], "velocity": 2}
        ],
        "transitions": [
          "cut",
          {"kind": "dissolve", "frames": 8}
        ],
        "distractors": [
          {"kind": "flash", "scene": 0, "position": 10, "frames": 1, "intensity": 0.9},
          {"kind": "pan", "scene": 2, "position": 5, "velocity": 2}
        ]
      }
    ]
  })");
  const auto specs = manifest_from_json(manifest);
  REQUIRE(specs.size() == 1);
  const SequenceSpec& seq = specs[0];
  CHECK(seq.name == "demo");
  CHECK(seq.width == 48);
  CHECK(seq.fps_num == 30);
  REQUIRE(seq.scenes.size() == 3);
  CHECK(seq.scenes[1].pattern == SceneSpec::Pattern::Noise);
  CHECK(seq.scenes[1].noise_amplitude == 20);
  REQUIRE(seq.transitions.size() == 2);
  CHECK(seq.transitions[0].kind == TransitionSpec::Kind::Cut);
  CHECK(seq.transitions[1].frames == 8);
  REQUIRE(seq.distractors.size() == 2);
  CHECK(seq.distractors[0].kind == DistractorSpec::Kind::Flash);

  const GeneratedSequence g = generate(seq);
  CHECK(g.frames.size() == 40 + 30 + 35 + 8);
  CHECK(g.truth.size() == 2);
}
