#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sbd/error.hpp"

namespace sbd {

enum class Chroma { C420, C422, C444 };

inline const char* chroma_name(Chroma c) {
  switch (c) {
    case Chroma::C420: return "420";
    case Chroma::C422: return "422";
    case Chroma::C444: return "444";
  }
  return "?";
}

inline int chroma_width(int width, Chroma c) {
  return c == Chroma::C444 ? width : (width + 1) / 2;
}

inline int chroma_height(int height, Chroma c) {
  return c == Chroma::C420 ? (height + 1) / 2 : height;
}

struct StreamInfo {
  int width = 0;
  int height = 0;
  int fps_num = 25;
  int fps_den = 1;
  Chroma chroma = Chroma::C420;
  std::optional<std::int64_t> frame_count_hint;

  std::size_t luma_size() const { return std::size_t(width) * std::size_t(height); }
  std::size_t chroma_size() const {
    return std::size_t(chroma_width(width, chroma)) * std::size_t(chroma_height(height, chroma));
  }
  std::size_t frame_size() const { return luma_size() + 2 * chroma_size(); }
};

// clamp to [0,255], round half up
inline std::uint8_t clamp_round_u8(double x) {
  double r = std::floor(x + 0.5);
  if (r < 0.0) r = 0.0;
  if (r > 255.0) r = 255.0;
  return static_cast<std::uint8_t>(r);
}

struct Rgb {
  std::uint8_t r, g, b;
};

// BT.601 full-range inverse
inline Rgb yuv_to_rgb(std::uint8_t y, std::uint8_t u, std::uint8_t v) {
  const double yd = y;
  const double ud = double(u) - 128.0;
  const double vd = double(v) - 128.0;
  return Rgb{clamp_round_u8(yd + 1.402 * vd),
             clamp_round_u8(yd - 0.344136 * ud - 0.714136 * vd),
             clamp_round_u8(yd + 1.772 * ud)};
}

struct Yuv {
  std::uint8_t y, u, v;
};

// forward BT.601 full-range, the exact companion of yuv_to_rgb
inline Yuv rgb_to_yuv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  const double u = 128.0 + (double(b) - y) / 1.772;
  const double v = 128.0 + (double(r) - y) / 1.402;
  return Yuv{clamp_round_u8(y), clamp_round_u8(u), clamp_round_u8(v)};
}

struct Hsv {
  double h;  // degrees, [0,360)
  double s;  // [0,1]
  double v;  // [0,1]
};

// Achromatic pixels (S=0 or V=0) get H=0 so hue deltas stay well defined.
inline Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double maxc = std::max(r, std::max(g, b));
  const double minc = std::min(r, std::min(g, b));
  const double v = maxc;
  const double d = maxc - minc;
  const double s = maxc > 0.0 ? d / maxc : 0.0;
  double h = 0.0;
  if (d > 0.0) {
    if (maxc == r) {
      h = 60.0 * ((g - b) / d);
    } else if (maxc == g) {
      h = 60.0 * ((b - r) / d + 2.0);
    } else {
      h = 60.0 * ((r - g) / d + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
  }
  return Hsv{h, s, v};
}

struct RgbPlanes {
  std::vector<std::uint8_t> r, g, b;
};

struct HsvPlanes {
  std::vector<double> h, s, v;
};

// One decoded frame: planar YUV plus lazily computed RGB/HSV views.
// Immutable after construction; the lazy views are memoized behind
// std::call_once so concurrent first access is safe.
class Frame {
 public:
  Frame(int index, int width, int height, Chroma chroma, std::vector<std::uint8_t> y,
        std::vector<std::uint8_t> u, std::vector<std::uint8_t> v)
      : index_(index),
        width_(width),
        height_(height),
        chroma_(chroma),
        y_(std::move(y)),
        u_(std::move(u)),
        v_(std::move(v)),
        views_(std::make_unique<Views>()) {
    if (width_ <= 0 || height_ <= 0) raise(Errc::GeometryMismatch, "non-positive frame dimensions");
    const std::size_t cw = std::size_t(chroma_width(width_, chroma_));
    const std::size_t ch = std::size_t(chroma_height(height_, chroma_));
    if (y_.size() != std::size_t(width_) * std::size_t(height_) || u_.size() != cw * ch ||
        v_.size() != cw * ch) {
      raise(Errc::GeometryMismatch, "plane sizes do not match frame geometry");
    }
  }

  Frame(Frame&&) noexcept = default;
  Frame& operator=(Frame&&) noexcept = default;
  Frame(const Frame&) = delete;
  Frame& operator=(const Frame&) = delete;

  int index() const { return index_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Chroma chroma() const { return chroma_; }
  std::size_t pixel_count() const { return std::size_t(width_) * std::size_t(height_); }

  const std::vector<std::uint8_t>& y() const { return y_; }
  const std::vector<std::uint8_t>& u() const { return u_; }
  const std::vector<std::uint8_t>& v() const { return v_; }

  // gray view == luma plane
  const std::vector<std::uint8_t>& gray() const { return y_; }

  std::uint8_t luma(int x, int y) const { return y_[std::size_t(y) * width_ + x]; }

  // nearest-neighbor chroma upsampling
  std::uint8_t u_at(int x, int y) const { return u_[chroma_offset(x, y)]; }
  std::uint8_t v_at(int x, int y) const { return v_[chroma_offset(x, y)]; }

  const RgbPlanes& rgb() const {
    std::call_once(views_->rgb_once, [this] { compute_rgb(); });
    return views_->rgb;
  }

  const HsvPlanes& hsv() const {
    std::call_once(views_->hsv_once, [this] { compute_hsv(); });
    return views_->hsv;
  }

 private:
  struct Views {
    std::once_flag rgb_once, hsv_once;
    RgbPlanes rgb;
    HsvPlanes hsv;
  };

  std::size_t chroma_offset(int x, int y) const {
    const int cw = chroma_width(width_, chroma_);
    int cx = x, cy = y;
    if (chroma_ != Chroma::C444) cx = std::min(x / 2, cw - 1);
    if (chroma_ == Chroma::C420) cy = std::min(y / 2, chroma_height(height_, chroma_) - 1);
    return std::size_t(cy) * cw + cx;
  }

  void compute_rgb() const {
    RgbPlanes& out = views_->rgb;
    const std::size_t n = pixel_count();
    out.r.resize(n);
    out.g.resize(n);
    out.b.resize(n);
    std::size_t i = 0;
    for (int yy = 0; yy < height_; ++yy) {
      for (int xx = 0; xx < width_; ++xx, ++i) {
        const Rgb p = yuv_to_rgb(y_[i], u_at(xx, yy), v_at(xx, yy));
        out.r[i] = p.r;
        out.g[i] = p.g;
        out.b[i] = p.b;
      }
    }
  }

  void compute_hsv() const {
    const RgbPlanes& in = rgb();
    HsvPlanes& out = views_->hsv;
    const std::size_t n = pixel_count();
    out.h.resize(n);
    out.s.resize(n);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Hsv p = rgb_to_hsv(in.r[i], in.g[i], in.b[i]);
      out.h[i] = p.h;
      out.s[i] = p.s;
      out.v[i] = p.v;
    }
  }

  int index_;
  int width_, height_;
  Chroma chroma_;
  std::vector<std::uint8_t> y_, u_, v_;
  mutable std::unique_ptr<Views> views_;
};

inline void check_same_geometry(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    raise(Errc::GeometryMismatch, "frames differ in geometry");
  }
}

}  // namespace sbd
