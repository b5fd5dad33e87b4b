#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/frame.hpp"

namespace sbd {

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  long long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v > 1 << 30) return false;
  }
  out = int(v);
  return true;
}

inline Chroma parse_chroma_tag(std::string_view tag) {
  if (tag == "444alpha") raise(Errc::UnsupportedChroma, "C444alpha has a fourth plane");
  if (tag.starts_with("420")) return Chroma::C420;
  if (tag.starts_with("422")) return Chroma::C422;
  if (tag.starts_with("444")) return Chroma::C444;
  raise(Errc::UnsupportedChroma, "chroma tag C" + std::string(tag));
}

}  // namespace detail

// Parses the YUV4MPEG2 signature line; consumes exactly through the
// terminating newline. Unknown parameters are ignored.
inline StreamInfo parse_y4m_header(std::istream& in) {
  static constexpr std::string_view kSig = "YUV4MPEG2";
  char sig[9];
  in.read(sig, 9);
  if (in.gcount() != 9 || std::string_view(sig, 9) != kSig) {
    raise(Errc::MissingSignature, "stream does not start with YUV4MPEG2");
  }
  std::string rest;
  if (!std::getline(in, rest)) raise(Errc::MalformedParam, "header line has no newline");
  if (!rest.empty() && rest.front() != ' ') {
    raise(Errc::MalformedParam, "garbage after YUV4MPEG2 signature");
  }

  StreamInfo info;
  bool have_w = false, have_h = false;
  std::size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && rest[pos] == ' ') ++pos;
    std::size_t end = rest.find(' ', pos);
    if (end == std::string::npos) end = rest.size();
    std::string_view tok(rest.data() + pos, end - pos);
    pos = end;
    if (tok.empty()) continue;
    const char key = tok.front();
    const std::string_view val = tok.substr(1);
    switch (key) {
      case 'W':
        if (!detail::parse_int(val, info.width) || info.width <= 0) {
          raise(Errc::MalformedParam, "bad W parameter");
        }
        have_w = true;
        break;
      case 'H':
        if (!detail::parse_int(val, info.height) || info.height <= 0) {
          raise(Errc::MalformedParam, "bad H parameter");
        }
        have_h = true;
        break;
      case 'F': {
        const std::size_t colon = val.find(':');
        if (colon == std::string_view::npos ||
            !detail::parse_int(val.substr(0, colon), info.fps_num) ||
            !detail::parse_int(val.substr(colon + 1), info.fps_den) || info.fps_num <= 0 ||
            info.fps_den <= 0) {
          raise(Errc::MalformedParam, "bad F parameter");
        }
        break;
      }
      case 'C':
        info.chroma = detail::parse_chroma_tag(val);
        break;
      default:
        break;  // I, A, X...: ignored
    }
  }
  if (!have_w || !have_h) raise(Errc::MalformedParam, "missing W or H parameter");
  return info;
}

inline StreamInfo parse_y4m_header(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  return parse_y4m_header(in);
}

class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in) : in_(in), info_(parse_y4m_header(in)) {}

  const StreamInfo& info() const { return info_; }

  // Consumes one FRAME marker line plus the three planes; returns
  // std::nullopt at a clean end of stream.
  std::optional<Frame> next() {
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
    std::string marker;
    if (!std::getline(in_, marker) || !std::string_view(marker).starts_with("FRAME")) {
      raise(Errc::BadFrameMarker, "expected FRAME marker at frame " + std::to_string(next_index_));
    }
    std::vector<std::uint8_t> y(info_.luma_size());
    std::vector<std::uint8_t> u(info_.chroma_size());
    std::vector<std::uint8_t> v(info_.chroma_size());
    read_plane(y);
    read_plane(u);
    read_plane(v);
    return Frame(next_index_++, info_.width, info_.height, info_.chroma, std::move(y),
                 std::move(u), std::move(v));
  }

 private:
  void read_plane(std::vector<std::uint8_t>& plane) {
    in_.read(reinterpret_cast<char*>(plane.data()), std::streamsize(plane.size()));
    if (std::size_t(in_.gcount()) != plane.size()) {
      raise(Errc::TruncatedFrame, "EOF inside frame " + std::to_string(next_index_));
    }
  }

  std::istream& in_;
  StreamInfo info_;
  int next_index_ = 0;
};

inline void write_y4m_header(std::ostream& out, const StreamInfo& info) {
  out << "YUV4MPEG2 W" << info.width << " H" << info.height << " F" << info.fps_num << ':'
      << info.fps_den << " Ip A1:1 C" << chroma_name(info.chroma) << '\n';
}

inline void write_y4m_frame(std::ostream& out, const StreamInfo& info, const Frame& frame) {
  if (frame.width() != info.width || frame.height() != info.height ||
      frame.chroma() != info.chroma) {
    raise(Errc::GeometryMismatch, "frame does not match stream geometry");
  }
  out << "FRAME\n";
  out.write(reinterpret_cast<const char*>(frame.y().data()), std::streamsize(frame.y().size()));
  out.write(reinterpret_cast<const char*>(frame.u().data()), std::streamsize(frame.u().size()));
  out.write(reinterpret_cast<const char*>(frame.v().data()), std::streamsize(frame.v().size()));
}

inline void write_y4m(std::ostream& out, const StreamInfo& info, std::span<const Frame> frames) {
  write_y4m_header(out, info);
  for (const Frame& f : frames) write_y4m_frame(out, info, f);
}

}  // namespace sbd
