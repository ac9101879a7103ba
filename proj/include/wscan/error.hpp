#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wscan {

enum class ErrorCode {
  // extension-loader
  kMissingManifest,
  kMalformedArchive,
  kUnresolvedScriptRef,
  kInvalidJson,
  kUnsupportedManifestVersion,
  // js-ast
  kParseError,
  kParseUnsupported,
  // rules / semantics databases
  kSchemaViolation,
  // instrumenter
  kAlreadyInstrumented,
  kWriteFailure,
  // dynamic harness
  kWebDriverUnreachable,
  kWebDriverProtocol,
  kExtensionLoadFailed,
  kStartPageNotFound,
  kSessionLost,
  kElementGone,
  kNoAdvanceControl,
  // detectors / corpus
  kEmptyCorpus,
  kTraceFormat,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures carry the 1-based source position of the offending token.
class ParseFailure : public Error {
 public:
  ParseFailure(ErrorCode code, const std::string& message, int line, int column)
      : Error(code, message), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace wscan
