#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/frame.hpp"

namespace sbd {

namespace detail {

// next token, skipping whitespace and '#' comments
inline std::string netpbm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

inline int netpbm_int(std::istream& in) {
  const std::string tok = netpbm_token(in);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    raise(Errc::MalformedNetpbm, "expected integer, got '" + tok + "'");
  }
  return std::stoi(tok);
}

// glob with '*' (any run) and '?' (single char)
inline bool glob_match(std::string_view pattern, std::string_view name) {
  std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace detail

// Binary PGM (P5) or PPM (P6), max value 255. PGM fills luma only with
// neutral chroma; both are stored as 4:4:4 frames.
inline Frame read_netpbm(std::istream& in, int index) {
  const std::string magic = detail::netpbm_token(in);
  if (magic != "P5" && magic != "P6") {
    raise(Errc::MalformedNetpbm, "unsupported magic '" + magic + "'");
  }
  const int width = detail::netpbm_int(in);
  const int height = detail::netpbm_int(in);
  const int maxval = detail::netpbm_int(in);
  if (width <= 0 || height <= 0) raise(Errc::MalformedNetpbm, "non-positive dimensions");
  if (maxval <= 0 || maxval > 255) {
    raise(Errc::MalformedNetpbm, "maxval " + std::to_string(maxval) + " not supported");
  }
  // header ends with exactly one whitespace byte (already consumed by the
  // token reader), binary samples follow
  const std::size_t n = std::size_t(width) * std::size_t(height);
  std::vector<std::uint8_t> y(n), u(n, 128), v(n, 128);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(y.data()), std::streamsize(n));
    if (std::size_t(in.gcount()) != n) raise(Errc::MalformedNetpbm, "truncated P5 raster");
  } else {
    std::vector<std::uint8_t> rgb(n * 3);
    in.read(reinterpret_cast<char*>(rgb.data()), std::streamsize(rgb.size()));
    if (std::size_t(in.gcount()) != rgb.size()) raise(Errc::MalformedNetpbm, "truncated P6 raster");
    for (std::size_t i = 0; i < n; ++i) {
      const Yuv p = rgb_to_yuv(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
      y[i] = p.y;
      u[i] = p.u;
      v[i] = p.v;
    }
  }
  return Frame(index, width, height, Chroma::C444, std::move(y), std::move(u), std::move(v));
}

// Frames from numbered image files, in lexicographic filename order.
// `pattern` is a directory, a single file, or a glob like frames/img_*.ppm.
class ImageSequenceReader {
 public:
  explicit ImageSequenceReader(const std::string& pattern) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::is_directory(pattern, ec)) {
      for (const auto& entry : fs::directory_iterator(pattern)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") files_.push_back(entry.path());
      }
    } else if (pattern.find('*') != std::string::npos || pattern.find('?') != std::string::npos) {
      const fs::path p(pattern);
      const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
      const std::string leaf = p.filename().string();
      if (fs::is_directory(dir, ec)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
          if (entry.is_regular_file() &&
              detail::glob_match(leaf, entry.path().filename().string())) {
            files_.push_back(entry.path());
          }
        }
      }
    } else if (fs::is_regular_file(pattern, ec)) {
      files_.push_back(pattern);
    }
    if (files_.empty()) raise(Errc::NoFilesMatched, "no netpbm files match '" + pattern + "'");
    std::sort(files_.begin(), files_.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  }

  std::optional<Frame> next() {
    if (next_index_ >= int(files_.size())) return std::nullopt;
    std::ifstream in(files_[next_index_], std::ios::binary);
    if (!in) raise(Errc::IoError, "cannot open " + files_[next_index_].string());
    Frame f = read_netpbm(in, next_index_);
    if (next_index_ == 0) {
      info_.width = f.width();
      info_.height = f.height();
      info_.chroma = f.chroma();
      info_.frame_count_hint = std::int64_t(files_.size());
    } else if (f.width() != info_.width || f.height() != info_.height) {
      raise(Errc::InconsistentDimensions,
            files_[next_index_].string() + " differs from first image");
    }
    ++next_index_;
    return f;
  }

  // valid once the first frame has been read (or call peek_info())
  const StreamInfo& info() const { return info_; }

  std::size_t file_count() const { return files_.size(); }

 private:
  std::vector<std::filesystem::path> files_;
  StreamInfo info_;
  int next_index_ = 0;
};

}  // namespace sbd
