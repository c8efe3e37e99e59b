#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oapa {

enum class ErrorCode {
  cyclic_import,
  missing_import,
  kind_conflict,
  unknown_entity,
  ambiguous_reference,
  duplicate_data_assertion,
  duplicate_annotation,
  unit_mismatch,
  invalid_identifier,
  invalid_range,
  syntax_error,
  bad_number,
  unsupported_construct,
  malformed_expr,
  non_positive_met,
  rpe_out_of_scale,
  undeclared_reference,
  validation_failed,
  unknown_profile,
  malformed_override,
  bad_case,
  config_error,
  io_error,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::cyclic_import: return "CyclicImport";
    case ErrorCode::missing_import: return "MissingImport";
    case ErrorCode::kind_conflict: return "KindConflict";
    case ErrorCode::unknown_entity: return "UnknownEntity";
    case ErrorCode::ambiguous_reference: return "AmbiguousReference";
    case ErrorCode::duplicate_data_assertion: return "DuplicateDataAssertion";
    case ErrorCode::duplicate_annotation: return "DuplicateAnnotation";
    case ErrorCode::unit_mismatch: return "UnitMismatch";
    case ErrorCode::invalid_identifier: return "InvalidIdentifier";
    case ErrorCode::invalid_range: return "InvalidRange";
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::bad_number: return "BadNumber";
    case ErrorCode::unsupported_construct: return "UnsupportedConstruct";
    case ErrorCode::malformed_expr: return "MalformedExpr";
    case ErrorCode::non_positive_met: return "NonPositiveMet";
    case ErrorCode::rpe_out_of_scale: return "RpeOutOfScale";
    case ErrorCode::undeclared_reference: return "UndeclaredReference";
    case ErrorCode::validation_failed: return "ValidationFailed";
    case ErrorCode::unknown_profile: return "UnknownProfile";
    case ErrorCode::malformed_override: return "MalformedOverride";
    case ErrorCode::bad_case: return "BadCase";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

/// Position of a diagnostic inside a source text. Line and column are 1-based.
struct SourceSpan {
  std::string file;
  int line = 0;
  int column = 0;

  std::string to_string() const {
    return (file.empty() ? std::string("<input>") : file) + ":" + std::to_string(line) + ":" +
           std::to_string(column);
  }

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// The single exception type thrown by the library. Callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(oapa::to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  Error(ErrorCode code, const std::string& message, SourceSpan span)
      : std::runtime_error(std::string(oapa::to_string(code)) + " at " + span.to_string() + ": " +
                           message),
        code_(code),
        message_(message),
        span_(std::move(span)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::optional<SourceSpan> span_;
};

}  // namespace oapa
