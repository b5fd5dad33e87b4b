#pragma once

#include <stdexcept>
#include <string>

namespace sbd {

enum class Errc {
  // stream parsing
  MissingSignature,
  MalformedParam,
  UnsupportedChroma,
  TruncatedFrame,
  BadFrameMarker,
  NoFilesMatched,
  MalformedNetpbm,
  InconsistentDimensions,
  // geometry
  GeometryMismatch,
  PlaneTooSmall,
  FrameTooSmall,
  // classification / training
  SchemaMismatch,
  WindowTooLarge,
  AnnotationOutOfRange,
  EmptyAnnotation,
  DegenerateData,
  TooFewGroups,
  // evaluation
  UnsortedInput,
  ZeroElapsed,
  // synthesis / misc
  InvalidSpec,
  ParseError,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MissingSignature: return "MissingSignature";
    case Errc::MalformedParam: return "MalformedParam";
    case Errc::UnsupportedChroma: return "UnsupportedChroma";
    case Errc::TruncatedFrame: return "TruncatedFrame";
    case Errc::BadFrameMarker: return "BadFrameMarker";
    case Errc::NoFilesMatched: return "NoFilesMatched";
    case Errc::MalformedNetpbm: return "MalformedNetpbm";
    case Errc::InconsistentDimensions: return "InconsistentDimensions";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::PlaneTooSmall: return "PlaneTooSmall";
    case Errc::FrameTooSmall: return "FrameTooSmall";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::AnnotationOutOfRange: return "AnnotationOutOfRange";
    case Errc::EmptyAnnotation: return "EmptyAnnotation";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::TooFewGroups: return "TooFewGroups";
    case Errc::UnsortedInput: return "UnsortedInput";
    case Errc::ZeroElapsed: return "ZeroElapsed";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sbd
