#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sbd/error.hpp"

namespace sbd {

enum class EventKind { Cut, Gradual };

// A ground-truth or predicted transition. A cut occupies a single frame
// (start == end, the first frame of the new shot); a gradual spans the
// blended frames.
struct BoundaryEvent {
  EventKind kind = EventKind::Cut;
  int start = 0;
  int end = 0;
  double confidence = 1.0;

  static BoundaryEvent cut(int frame, double conf = 1.0) {
    return BoundaryEvent{EventKind::Cut, frame, frame, conf};
  }
  static BoundaryEvent gradual(int start, int end, double conf = 1.0) {
    return BoundaryEvent{EventKind::Gradual, start, end, conf};
  }

  int frame() const { return start; }
  int length() const { return end - start + 1; }

  friend bool operator==(const BoundaryEvent& a, const BoundaryEvent& b) {
    return a.kind == b.kind && a.start == b.start && a.end == b.end;
  }
};

inline bool event_order(const BoundaryEvent& a, const BoundaryEvent& b) {
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

inline void sort_events(std::vector<BoundaryEvent>& events) {
  std::sort(events.begin(), events.end(), event_order);
}

// Text format, one event per line:
//   cut <frame> [confidence]
//   grad <start> <end> [confidence]
// '#' starts a comment.
inline std::vector<BoundaryEvent> read_events(std::istream& in) {
  std::vector<BoundaryEvent> events;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    BoundaryEvent ev;
    if (kind == "cut") {
      long frame = -1;
      if (!(ls >> frame) || frame < 0) {
        raise(Errc::ParseError, "bad cut line " + std::to_string(lineno));
      }
      ev = BoundaryEvent::cut(int(frame));
    } else if (kind == "grad") {
      long s = -1, e = -1;
      if (!(ls >> s >> e) || s < 0 || e < s) {
        raise(Errc::ParseError, "bad grad line " + std::to_string(lineno));
      }
      ev = BoundaryEvent::gradual(int(s), int(e));
    } else {
      raise(Errc::ParseError, "unknown event kind '" + kind + "' at line " +
                                  std::to_string(lineno));
    }
    double conf;
    if (ls >> conf) ev.confidence = conf;
    events.push_back(ev);
  }
  sort_events(events);
  return events;
}

inline void write_event_line(std::ostream& out, const BoundaryEvent& ev, bool with_confidence) {
  if (ev.kind == EventKind::Cut) {
    out << "cut " << ev.start;
  } else {
    out << "grad " << ev.start << ' ' << ev.end;
  }
  if (with_confidence) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", ev.confidence);
    out << ' ' << buf;
  }
  out << '\n';
}

// ground-truth / training annotation format (no confidence column)
inline void write_annotations(std::ostream& out, const std::vector<BoundaryEvent>& events) {
  for (const BoundaryEvent& ev : events) write_event_line(out, ev, false);
}

// detector output format (with confidence)
inline void write_detections(std::ostream& out, const std::vector<BoundaryEvent>& events) {
  for (const BoundaryEvent& ev : events) write_event_line(out, ev, true);
}

}  // namespace sbd
