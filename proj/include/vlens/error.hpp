#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vlens {

enum class ErrorCode {
  DuplicateId,
  DanglingEndpoint,
  CompositionCycle,
  DuplicateRelationship,
  InvalidItem,
  UnknownItem,
  NoItemsOfKind,
  MalformedXml,
  SchemaViolation,
  GraphInvalid,
  UnknownAttributeInFilter,
  InvalidSpec,
  InvalidQuery,
  InvalidArgument,
  NotInIntersection,
  UnknownActor,
  UnknownViewpoint,
  UnknownSession,
  AnchorNotInLastResult,
  NoQueryInSession,
  IoError,
  PortInUse,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::CompositionCycle: return "CompositionCycle";
    case ErrorCode::DuplicateRelationship: return "DuplicateRelationship";
    case ErrorCode::InvalidItem: return "InvalidItem";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::NoItemsOfKind: return "NoItemsOfKind";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::GraphInvalid: return "GraphInvalid";
    case ErrorCode::UnknownAttributeInFilter: return "UnknownAttributeInFilter";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotInIntersection: return "NotInIntersection";
    case ErrorCode::UnknownActor: return "UnknownActor";
    case ErrorCode::UnknownViewpoint: return "UnknownViewpoint";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::AnchorNotInLastResult: return "AnchorNotInLastResult";
    case ErrorCode::NoQueryInSession: return "NoQueryInSession";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PortInUse: return "PortInUse";
  }
  return "Unknown";
}

/// Every failure in the library is reported as a vlens::Error. The code is
/// the stable, machine-readable part; `subjects()` names the offending ids.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> subjects = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        subjects_(std::move(subjects)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }

  // Set for GraphInvalid: the build_graph failure that was wrapped.
  std::optional<ErrorCode> cause() const noexcept { return cause_; }
  // Set for MalformedXml.
  std::optional<std::pair<long, long>> position() const noexcept { return position_; }
  // Set for SchemaViolation: slash-separated element path.
  const std::string& path() const noexcept { return path_; }

  static Error malformed_xml(long line, long column, const std::string& reason) {
    Error e(ErrorCode::MalformedXml,
            "line " + std::to_string(line) + ", column " + std::to_string(column) +
                ": " + reason);
    e.position_ = std::make_pair(line, column);
    return e;
  }

  static Error schema_violation(const std::string& path, const std::string& reason) {
    Error e(ErrorCode::SchemaViolation, path + ": " + reason);
    e.path_ = path;
    return e;
  }

  static Error graph_invalid(const Error& inner) {
    Error e(ErrorCode::GraphInvalid, inner.what(), inner.subjects());
    e.cause_ = inner.code();
    return e;
  }

 private:
  ErrorCode code_;
  std::vector<std::string> subjects_;
  std::optional<ErrorCode> cause_;
  std::optional<std::pair<long, long>> position_;
  std::string path_;
};

}  // namespace vlens
