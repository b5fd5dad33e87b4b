#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbd/error.hpp"
#include "sbd/events.hpp"
#include "sbd/frame.hpp"
#include "sbd/rng.hpp"
#include "sbd/y4m.hpp"

namespace sbd {

struct YuvColor {
  std::uint8_t y = 128, u = 128, v = 128;
};

struct SceneSpec {
  enum class Pattern { Solid, Gradient, Noise, MovingBlocks };

  int length = 1;
  Pattern pattern = Pattern::Solid;
  YuvColor color;
  std::uint64_t noise_seed = 0;
  int noise_amplitude = 24;
  int velocity = 1;  // moving-blocks drift, px/frame
};

struct TransitionSpec {
  enum class Kind { Cut, Dissolve, Fade, Wipe };

  Kind kind = Kind::Cut;
  int frames = 0;  // blended frames for the gradual kinds, >= 2
};

struct DistractorSpec {
  enum class Kind { Flash, Pan };

  Kind kind = Kind::Flash;
  int scene = 0;     // index into scenes
  int position = 0;  // local frame within the scene
  int frames = 1;    // flash length, 1..3
  double intensity = 0.85;  // flash blend toward white, (0,1]
  int velocity = 2;  // pan speed, px/frame
};

struct SequenceSpec {
  std::string name = "seq";
  int width = 64;
  int height = 64;
  int fps_num = 25;
  int fps_den = 1;
  Chroma chroma = Chroma::C420;
  std::uint64_t seed = 1;
  std::vector<SceneSpec> scenes;
  std::vector<TransitionSpec> transitions;  // between consecutive scenes
  std::vector<DistractorSpec> distractors;
};

struct GeneratedSequence {
  StreamInfo info;
  std::vector<Frame> frames;
  std::vector<BoundaryEvent> truth;
};

namespace detail {

struct Image444 {
  std::vector<std::uint8_t> y, u, v;
};

inline void validate_spec(const SequenceSpec& seq) {
  if (seq.width < 32 || seq.height < 32) raise(Errc::InvalidSpec, "geometry below 32x32");
  if (seq.scenes.empty()) raise(Errc::InvalidSpec, "no scenes");
  if (seq.transitions.size() + 1 != seq.scenes.size()) {
    raise(Errc::InvalidSpec, "need exactly one transition between consecutive scenes");
  }
  for (const SceneSpec& s : seq.scenes) {
    if (s.length < 1) raise(Errc::InvalidSpec, "scene length must be >= 1");
  }
  for (const TransitionSpec& t : seq.transitions) {
    if (t.kind != TransitionSpec::Kind::Cut && t.frames < 2) {
      raise(Errc::InvalidSpec, "gradual transitions need at least 2 frames");
    }
  }
  for (const DistractorSpec& d : seq.distractors) {
    if (d.scene < 0 || d.scene >= int(seq.scenes.size())) {
      raise(Errc::InvalidSpec, "distractor scene index out of range");
    }
    const int len = seq.scenes[std::size_t(d.scene)].length;
    if (d.position < 0 || d.position >= len) {
      raise(Errc::InvalidSpec, "distractor position outside its scene");
    }
    if (d.kind == DistractorSpec::Kind::Flash) {
      if (d.frames < 1 || d.frames > 3) raise(Errc::InvalidSpec, "flash length must be 1..3");
      if (d.position + d.frames > len) raise(Errc::InvalidSpec, "flash runs past its scene");
      if (!(d.intensity > 0.0 && d.intensity <= 1.0)) {
        raise(Errc::InvalidSpec, "flash intensity must be in (0,1]");
      }
    }
  }
}

inline Image444 render_scene(const SequenceSpec& seq, int scene_index, int local_frame) {
  const SceneSpec& scene = seq.scenes[std::size_t(scene_index)];
  const int w = seq.width, h = seq.height;
  Image444 img;
  img.y.assign(std::size_t(w) * h, scene.color.y);
  img.u.assign(std::size_t(w) * h, scene.color.u);
  img.v.assign(std::size_t(w) * h, scene.color.v);

  int pan_offset = 0;
  for (const DistractorSpec& d : seq.distractors) {
    if (d.kind == DistractorSpec::Kind::Pan && d.scene == scene_index &&
        local_frame >= d.position) {
      pan_offset += d.velocity * (local_frame - d.position);
    }
  }

  switch (scene.pattern) {
    case SceneSpec::Pattern::Solid:
      break;
    case SceneSpec::Pattern::Gradient: {
      // horizontal luma ramp around the base color; pan shifts its phase
      for (int x = 0; x < w; ++x) {
        const int sx = ((x - pan_offset) % w + w) % w;
        const double t = w > 1 ? double(sx) / double(w - 1) : 0.0;
        const std::uint8_t yv = clamp_round_u8(double(scene.color.y) - 60.0 + 120.0 * t);
        for (int y = 0; y < h; ++y) img.y[std::size_t(y) * w + x] = yv;
      }
      break;
    }
    case SceneSpec::Pattern::Noise: {
      // fresh film-grain noise every frame, luma only
      SplitMix64 rng(mix_seed(mix_seed(seq.seed, scene.noise_seed), std::uint64_t(local_frame)));
      const int amp = scene.noise_amplitude;
      for (std::uint8_t& s : img.y) {
        const int delta = int(rng.next_below(std::uint64_t(2 * amp + 1))) - amp;
        s = clamp_round_u8(double(scene.color.y) + double(delta));
      }
      break;
    }
    case SceneSpec::Pattern::MovingBlocks: {
      const int bs = std::max(4, w / 8);
      const int tile = 2 * bs;
      const int phase = scene.velocity * local_frame + pan_offset;
      const std::uint8_t fg =
          scene.color.y >= 128 ? std::uint8_t(scene.color.y - 100) : std::uint8_t(scene.color.y + 100);
      for (int y = 0; y < h; ++y) {
        const bool row_on = (y % tile) < bs;
        if (!row_on) continue;
        for (int x = 0; x < w; ++x) {
          const int px = ((x + phase) % tile + tile) % tile;
          if (px < bs) img.y[std::size_t(y) * w + x] = fg;
        }
      }
      break;
    }
  }

  for (const DistractorSpec& d : seq.distractors) {
    if (d.kind == DistractorSpec::Kind::Flash && d.scene == scene_index &&
        local_frame >= d.position && local_frame < d.position + d.frames) {
      for (std::uint8_t& s : img.y) s = clamp_round_u8(s + (255.0 - s) * d.intensity);
      for (std::uint8_t& s : img.u) s = clamp_round_u8(s + (128.0 - s) * d.intensity);
      for (std::uint8_t& s : img.v) s = clamp_round_u8(s + (128.0 - s) * d.intensity);
    }
  }
  return img;
}

inline Image444 blend_images(const Image444& a, const Image444& b, double alpha, int pixels) {
  Image444 out;
  out.y.resize(std::size_t(pixels));
  out.u.resize(std::size_t(pixels));
  out.v.resize(std::size_t(pixels));
  for (int i = 0; i < pixels; ++i) {
    out.y[std::size_t(i)] = clamp_round_u8((1.0 - alpha) * a.y[std::size_t(i)] + alpha * b.y[std::size_t(i)]);
    out.u[std::size_t(i)] = clamp_round_u8((1.0 - alpha) * a.u[std::size_t(i)] + alpha * b.u[std::size_t(i)]);
    out.v[std::size_t(i)] = clamp_round_u8((1.0 - alpha) * a.v[std::size_t(i)] + alpha * b.v[std::size_t(i)]);
  }
  return out;
}

inline Frame image_to_frame(const Image444& img, int index, int w, int h, Chroma chroma) {
  const int cw = chroma_width(w, chroma);
  const int ch = chroma_height(h, chroma);
  const int sx = chroma == Chroma::C444 ? 1 : 2;
  const int sy = chroma == Chroma::C420 ? 2 : 1;
  std::vector<std::uint8_t> u(std::size_t(cw) * ch), v(std::size_t(cw) * ch);
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      const std::size_t src = std::size_t(std::min(cy * sy, h - 1)) * w + std::min(cx * sx, w - 1);
      u[std::size_t(cy) * cw + cx] = img.u[src];
      v[std::size_t(cy) * cw + cx] = img.v[src];
    }
  }
  return Frame(index, w, h, chroma, img.y, std::move(u), std::move(v));
}

}  // namespace detail

// Renders the scripted sequence. Ground truth: a cut lands on the first
// frame of the new scene; a gradual spans exactly the blended frames;
// distractors contribute no events. Deterministic for a fixed spec.
inline GeneratedSequence generate(const SequenceSpec& seq) {
  detail::validate_spec(seq);
  const int w = seq.width, h = seq.height;
  const int pixels = w * h;
  GeneratedSequence out;
  out.info.width = w;
  out.info.height = h;
  out.info.fps_num = seq.fps_num;
  out.info.fps_den = seq.fps_den;
  out.info.chroma = seq.chroma;

  int index = 0;
  auto emit = [&](const detail::Image444& img) {
    out.frames.push_back(detail::image_to_frame(img, index, w, h, seq.chroma));
    ++index;
  };

  for (std::size_t s = 0; s < seq.scenes.size(); ++s) {
    for (int f = 0; f < seq.scenes[s].length; ++f) {
      emit(detail::render_scene(seq, int(s), f));
    }
    if (s + 1 == seq.scenes.size()) break;
    const TransitionSpec& tr = seq.transitions[s];
    if (tr.kind == TransitionSpec::Kind::Cut) {
      out.truth.push_back(BoundaryEvent::cut(index));  // first frame of the next scene
      continue;
    }
    const int d = tr.frames;
    const detail::Image444 from = detail::render_scene(seq, int(s), seq.scenes[s].length - 1);
    const detail::Image444 to = detail::render_scene(seq, int(s) + 1, 0);
    out.truth.push_back(BoundaryEvent::gradual(index, index + d - 1));
    for (int j = 1; j <= d; ++j) {
      const double pos = double(j) / double(d + 1);
      switch (tr.kind) {
        case TransitionSpec::Kind::Dissolve:
          emit(detail::blend_images(from, to, pos, pixels));
          break;
        case TransitionSpec::Kind::Fade: {
          // through black at the midpoint
          detail::Image444 black;
          black.y.assign(std::size_t(pixels), 0);
          black.u.assign(std::size_t(pixels), 128);
          black.v.assign(std::size_t(pixels), 128);
          if (pos <= 0.5) {
            emit(detail::blend_images(from, black, 2.0 * pos, pixels));
          } else {
            emit(detail::blend_images(black, to, 2.0 * pos - 1.0, pixels));
          }
          break;
        }
        case TransitionSpec::Kind::Wipe: {
          // vertical boundary sweeps left to right
          const int boundary = int(std::lround(double(w) * pos));
          detail::Image444 img = from;
          for (int y = 0; y < h; ++y) {
            for (int x = 0; x < boundary; ++x) {
              const std::size_t px = std::size_t(y) * w + x;
              img.y[px] = to.y[px];
              img.u[px] = to.u[px];
              img.v[px] = to.v[px];
            }
          }
          emit(img);
          break;
        }
        case TransitionSpec::Kind::Cut:
          break;  // unreachable
      }
    }
  }
  out.info.frame_count_hint = std::int64_t(out.frames.size());
  sort_events(out.truth);
  return out;
}

// ---------------------------------------------------------------------------
// JSON corpus manifest
// ---------------------------------------------------------------------------

namespace detail {

inline SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  s.length = j.at("length").get<int>();
  const std::string pattern = j.value("pattern", "solid");
  if (pattern == "solid") {
    s.pattern = SceneSpec::Pattern::Solid;
  } else if (pattern == "gradient") {
    s.pattern = SceneSpec::Pattern::Gradient;
  } else if (pattern == "noise") {
    s.pattern = SceneSpec::Pattern::Noise;
  } else if (pattern == "moving_blocks") {
    s.pattern = SceneSpec::Pattern::MovingBlocks;
  } else {
    raise(Errc::InvalidSpec, "unknown pattern '" + pattern + "'");
  }
  if (j.contains("color")) {
    const auto& c = j.at("color");
    s.color = YuvColor{std::uint8_t(c.at(0).get<int>()), std::uint8_t(c.at(1).get<int>()),
                       std::uint8_t(c.at(2).get<int>())};
  }
  s.noise_seed = j.value("seed", 0ULL);
  s.noise_amplitude = j.value("amplitude", 24);
  s.velocity = j.value("velocity", 1);
  return s;
}

inline TransitionSpec transition_from_json(const nlohmann::json& j) {
  TransitionSpec t;
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "cut") {
    t.kind = TransitionSpec::Kind::Cut;
  } else if (kind == "dissolve") {
    t.kind = TransitionSpec::Kind::Dissolve;
  } else if (kind == "fade") {
    t.kind = TransitionSpec::Kind::Fade;
  } else if (kind == "wipe") {
    t.kind = TransitionSpec::Kind::Wipe;
  } else {
    raise(Errc::InvalidSpec, "unknown transition '" + kind + "'");
  }
  if (!j.is_string()) t.frames = j.value("frames", 0);
  return t;
}

inline DistractorSpec distractor_from_json(const nlohmann::json& j) {
  DistractorSpec d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "flash") {
    d.kind = DistractorSpec::Kind::Flash;
  } else if (kind == "pan") {
    d.kind = DistractorSpec::Kind::Pan;
  } else {
    raise(Errc::InvalidSpec, "unknown distractor '" + kind + "'");
  }
  d.scene = j.at("scene").get<int>();
  d.position = j.at("position").get<int>();
  d.frames = j.value("frames", 1);
  d.intensity = j.value("intensity", 0.85);
  d.velocity = j.value("velocity", 2);
  return d;
}

}  // namespace detail

inline SequenceSpec sequence_from_json(const nlohmann::json& j) {
  try {
    SequenceSpec seq;
    seq.name = j.value("name", "seq");
    seq.width = j.value("width", 64);
    seq.height = j.value("height", 64);
    if (j.contains("fps")) {
      seq.fps_num = j.at("fps").at(0).get<int>();
      seq.fps_den = j.at("fps").at(1).get<int>();
    }
    const std::string chroma = j.value("chroma", "420");
    if (chroma == "420") {
      seq.chroma = Chroma::C420;
    } else if (chroma == "422") {
      seq.chroma = Chroma::C422;
    } else if (chroma == "444") {
      seq.chroma = Chroma::C444;
    } else {
      raise(Errc::InvalidSpec, "unknown chroma '" + chroma + "'");
    }
    seq.seed = j.value("seed", 1ULL);
    for (const auto& sj : j.at("scenes")) seq.scenes.push_back(detail::scene_from_json(sj));
    if (j.contains("transitions")) {
      for (const auto& tj : j.at("transitions")) {
        seq.transitions.push_back(detail::transition_from_json(tj));
      }
    }
    if (j.contains("distractors")) {
      for (const auto& dj : j.at("distractors")) {
        seq.distractors.push_back(detail::distractor_from_json(dj));
      }
    }
    return seq;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::InvalidSpec, std::string("bad sequence spec: ") + e.what());
  }
}

inline std::vector<SequenceSpec> manifest_from_json(const nlohmann::json& j) {
  std::vector<SequenceSpec> out;
  try {
    for (const auto& sj : j.at("sequences")) out.push_back(sequence_from_json(sj));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::InvalidSpec, std::string("bad corpus manifest: ") + e.what());
  }
  return out;
}

}  // namespace sbd
