#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sbd/error.hpp"
#include "sbd/events.hpp"

namespace sbd {

// A potential scene change cut out for human review: a short span around
// the candidate frame.
struct CandidateSegment {
  std::string video_id;
  int center = 0;
  int start = 0;
  int end = 0;
  std::vector<int> sources;  // indices of the detectors that proposed it

  std::string id() const { return video_id + ":" + std::to_string(center); }
};

// Union the recall-tuned detector outputs, cluster proposals closer than
// min_separation, and emit a span_length window centred on each cluster
// median (shifted, not truncated, at the video edges).
inline std::vector<CandidateSegment> merge_candidates(
    const std::vector<std::vector<int>>& detector_outputs, const std::string& video_id,
    int video_length, int min_separation = 40, int span_length = 40) {
  std::vector<std::pair<int, int>> proposals;  // (frame, detector)
  for (std::size_t d = 0; d < detector_outputs.size(); ++d) {
    for (int frame : detector_outputs[d]) proposals.emplace_back(frame, int(d));
  }
  std::vector<CandidateSegment> out;
  if (proposals.empty()) return out;
  std::sort(proposals.begin(), proposals.end());

  const auto flush = [&](std::size_t begin, std::size_t end_exclusive) {
    std::vector<int> frames;
    std::set<int> sources;
    for (std::size_t i = begin; i < end_exclusive; ++i) {
      frames.push_back(proposals[i].first);
      sources.insert(proposals[i].second);
    }
    const std::size_t mid = frames.size() / 2;
    const int center = frames.size() % 2 == 1
                           ? frames[mid]
                           : (frames[mid - 1] + frames[mid]) / 2;
    CandidateSegment seg;
    seg.video_id = video_id;
    seg.center = center;
    seg.start = std::clamp(center - span_length / 2, 0, std::max(0, video_length - span_length));
    seg.end = std::min(video_length - 1, seg.start + span_length - 1);
    seg.sources.assign(sources.begin(), sources.end());
    out.push_back(std::move(seg));
  };

  std::size_t cluster_begin = 0;
  for (std::size_t i = 1; i <= proposals.size(); ++i) {
    if (i == proposals.size() || proposals[i].first - proposals[i - 1].first >= min_separation) {
      flush(cluster_begin, i);
      cluster_begin = i;
    }
  }
  return out;
}

enum class VoteStatus { Accepted, Rejected, NeedsMore };

inline const char* vote_status_name(VoteStatus s) {
  switch (s) {
    case VoteStatus::Accepted: return "accepted";
    case VoteStatus::Rejected: return "rejected";
    case VoteStatus::NeedsMore: return "needs_more";
  }
  return "?";
}

// Accepted/rejected once the margin between yes and no reaches `margin`
// with at least min_votes judgments; anything narrower needs more
// observers. Order-invariant and monotone in added yes votes.
inline VoteStatus aggregate_votes(const std::vector<bool>& votes, int min_votes = 5,
                                  int margin = 2) {
  int yes = 0, no = 0;
  for (bool v : votes) (v ? yes : no) += 1;
  const int total = yes + no;
  if (total >= min_votes && yes - no >= margin) return VoteStatus::Accepted;
  if (total >= min_votes && no - yes >= margin) return VoteStatus::Rejected;
  return VoteStatus::NeedsMore;
}

// CSV manifest for a crowdsourcing upload: segment id, video id, span.
inline void write_task_manifest(std::ostream& out, const std::vector<CandidateSegment>& segments) {
  out << "segment_id,video_id,start,end\n";
  for (const CandidateSegment& s : segments) {
    out << s.id() << ',' << s.video_id << ',' << s.start << ',' << s.end << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline std::vector<CandidateSegment> read_task_manifest(std::istream& in) {
  std::vector<CandidateSegment> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (first && !fields.empty() && fields[0] == "segment_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 4) raise(Errc::ParseError, "bad manifest line: " + line);
    CandidateSegment seg;
    seg.video_id = fields[1];
    seg.start = std::stoi(fields[2]);
    seg.end = std::stoi(fields[3]);
    const std::size_t colon = fields[0].rfind(':');
    if (colon == std::string::npos) raise(Errc::ParseError, "bad segment id: " + fields[0]);
    seg.center = std::stoi(fields[0].substr(colon + 1));
    out.push_back(std::move(seg));
  }
  return out;
}

struct Vote {
  std::string segment_id;
  bool yes = false;
};

// CSV: segment_id, judgment (yes/no, y/n, 1/0, true/false)
inline std::vector<Vote> read_votes_csv(std::istream& in) {
  std::vector<Vote> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (first && !fields.empty() && fields[0] == "segment_id") {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 2) raise(Errc::ParseError, "bad vote line: " + line);
    std::string j = fields[1];
    std::transform(j.begin(), j.end(), j.begin(), [](unsigned char c) { return std::tolower(c); });
    bool yes;
    if (j == "yes" || j == "y" || j == "1" || j == "true") {
      yes = true;
    } else if (j == "no" || j == "n" || j == "0" || j == "false") {
      yes = false;
    } else {
      raise(Errc::ParseError, "bad judgment '" + fields[1] + "'");
    }
    out.push_back(Vote{fields[0], yes});
  }
  return out;
}

inline std::map<std::string, std::vector<bool>> group_votes(const std::vector<Vote>& votes) {
  std::map<std::string, std::vector<bool>> grouped;
  for (const Vote& v : votes) grouped[v.segment_id].push_back(v.yes);
  return grouped;
}

// Accepted candidate frames become `cut` annotation lines, deduplicated
// and sorted. Zero accepted segments still produce a commented header.
inline void finalize_annotations(std::ostream& out, std::vector<int> accepted_centers) {
  std::sort(accepted_centers.begin(), accepted_centers.end());
  accepted_centers.erase(std::unique(accepted_centers.begin(), accepted_centers.end()),
                         accepted_centers.end());
  out << "# annotations from observer-accepted candidate segments\n";
  for (int frame : accepted_centers) out << "cut " << frame << '\n';
}

}  // namespace sbd
