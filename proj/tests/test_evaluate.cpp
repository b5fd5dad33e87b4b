#include <doctest.h>

#include <sstream>

#include "sbd/evaluate.hpp"
#include "sbd/rng.hpp"

using namespace sbd;

TEST_CASE("event matching") {
  SUBCASE("cut matched within tolerance") {
    const auto m = match_events({BoundaryEvent::cut(100)}, {BoundaryEvent::cut(101)}, 2);
    CHECK(m.overall.tp == 1);
    CHECK(m.overall.fp == 0);
    CHECK(m.overall.fn == 0);
    CHECK(m.kind_mismatches == 0);
  }
  SUBCASE("cut outside tolerance is both a miss and a false alarm") {
    const auto m = match_events({BoundaryEvent::cut(100)}, {BoundaryEvent::cut(105)}, 2);
    CHECK(m.overall.tp == 0);
    CHECK(m.overall.fp == 1);
    CHECK(m.overall.fn == 1);
  }
  SUBCASE("predicted cut inside a ground-truth gradual is a kind mismatch") {
    // enumeration of the matching: the only pred intersects [38, 52]
    const auto m = match_events({BoundaryEvent::gradual(40, 50)}, {BoundaryEvent::cut(45)}, 2);
    CHECK(m.overall.tp == 1);
    CHECK(m.overall.fp == 0);
    CHECK(m.overall.fn == 0);
    CHECK(m.kind_mismatches == 1);
    CHECK(m.cuts.tp == 0);
    CHECK(m.graduals.tp == 0);
  }
  SUBCASE("tolerance zero requires the exact frame") {
    CHECK(match_events({BoundaryEvent::cut(10)}, {BoundaryEvent::cut(10)}, 0).overall.tp == 1);
    CHECK(match_events({BoundaryEvent::cut(10)}, {BoundaryEvent::cut(11)}, 0).overall.tp == 0);
  }
  SUBCASE("matching is one-to-one") {
    const std::vector<BoundaryEvent> gt{BoundaryEvent::cut(100)};
    const std::vector<BoundaryEvent> pred{BoundaryEvent::cut(99), BoundaryEvent::cut(101)};
    const auto m = match_events(gt, pred, 2);
    CHECK(m.overall.tp == 1);
    CHECK(m.overall.fp == 1);
    CHECK(m.overall.fn == 0);
  }
  SUBCASE("counts are consistent with list sizes") {
    SplitMix64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<BoundaryEvent> gt, pred;
      for (std::uint64_t i = rng.next_below(8); i > 0; --i) {
        gt.push_back(BoundaryEvent::cut(int(rng.next_below(500))));
      }
      for (std::uint64_t i = rng.next_below(8); i > 0; --i) {
        pred.push_back(BoundaryEvent::cut(int(rng.next_below(500))));
      }
      sort_events(gt);
      sort_events(pred);
      const auto m = match_events(gt, pred, 2);
      CHECK(m.overall.tp <= int(std::min(gt.size(), pred.size())));
      CHECK(m.overall.tp + m.overall.fp == int(pred.size()));
      CHECK(m.overall.tp + m.overall.fn == int(gt.size()));
    }
  }
  SUBCASE("unsorted input is rejected") {
    const std::vector<BoundaryEvent> bad{BoundaryEvent::cut(50), BoundaryEvent::cut(10)};
    try {
      match_events(bad, {}, 2);
      FAIL("expected UnsortedInput");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnsortedInput);
    }
  }
}

TEST_CASE("scoring conventions") {
  SUBCASE("perfect single match") {
    const EvalReport r = score(match_events({BoundaryEvent::cut(5)}, {BoundaryEvent::cut(5)}, 2));
    CHECK(r.overall_scores.precision == 1.0);
    CHECK(r.overall_scores.recall == 1.0);
    CHECK(r.overall_scores.f1 == 1.0);
  }
  SUBCASE("empty against empty is perfect silence") {
    const EvalReport r = score(match_events({}, {}, 2));
    CHECK(r.overall_scores.precision == 1.0);
    CHECK(r.overall_scores.recall == 1.0);
    CHECK(r.overall_scores.f1 == 1.0);
  }
  SUBCASE("90 true, 10 spurious, 10 missed") {
    Matching m;
    m.overall = MatchCounts{90, 10, 10};
    const EvalReport r = score(m);
    CHECK(r.overall_scores.precision == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r.overall_scores.recall == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(r.overall_scores.f1 == doctest::Approx(0.9).epsilon(1e-15));
  }
  SUBCASE("all misses give zero f1") {
    Matching m;
    m.overall = MatchCounts{0, 0, 5};
    const EvalReport r = score(m);
    CHECK(r.overall_scores.precision == 1.0);  // no predictions: silence was right
    CHECK(r.overall_scores.recall == 0.0);
    CHECK(r.overall_scores.f1 == 0.0);
  }
}

TEST_CASE("permutation invariance after sorting") {
  std::vector<BoundaryEvent> gt{BoundaryEvent::cut(10), BoundaryEvent::gradual(50, 60),
                                BoundaryEvent::cut(100)};
  std::vector<BoundaryEvent> pred{BoundaryEvent::cut(11), BoundaryEvent::cut(55),
                                  BoundaryEvent::cut(99)};
  const auto base = match_events(gt, pred, 2);
  std::vector<BoundaryEvent> gt2{gt[2], gt[0], gt[1]};
  std::vector<BoundaryEvent> pred2{pred[1], pred[2], pred[0]};
  sort_events(gt2);
  sort_events(pred2);
  const auto again = match_events(gt2, pred2, 2);
  CHECK(base.overall.tp == again.overall.tp);
  CHECK(base.overall.fp == again.overall.fp);
  CHECK(base.overall.fn == again.overall.fn);
  CHECK(base.kind_mismatches == again.kind_mismatches);
}

TEST_CASE("throughput") {
  CHECK(throughput(310, 10.0) == doctest::Approx(31.0));
  CHECK(throughput(0, 1.0) == 0.0);
  CHECK(throughput(1000, 4.0) == doctest::Approx(250.0));
  try {
    throughput(100, 0.0);
    FAIL("expected ZeroElapsed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroElapsed);
  }
}

TEST_CASE("report output") {
  Matching m;
  m.overall = MatchCounts{90, 10, 10};
  EvalReport r = score(m);
  r.fps = 31.0;
  SUBCASE("json fields") {
    const nlohmann::json j = report_to_json(r);
    CHECK(j.at("overall").at("tp") == 90);
    CHECK(j.at("overall").at("f1").get<double>() == doctest::Approx(0.9));
    CHECK(j.at("fps").get<double>() == doctest::Approx(31.0));
  }
  SUBCASE("aligned table mirrors the published columns") {
    std::ostringstream out;
    write_report_table(out, {{"proposed", r}});
    const std::string text = out.str();
    CHECK(text.find("Method") != std::string::npos);
    CHECK(text.find("Speed (FPS)") != std::string::npos);
    CHECK(text.find("F score") != std::string::npos);
    CHECK(text.find("Precision") != std::string::npos);
    CHECK(text.find("Recall") != std::string::npos);
    CHECK(text.find("proposed") != std::string::npos);
    CHECK(text.find("0.9000") != std::string::npos);
  }
}
