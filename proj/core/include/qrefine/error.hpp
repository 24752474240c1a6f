#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrefine {

/// Failure categories shared by every module. In-process and remote
/// enhancers report through the same taxonomy.
enum class ErrorKind {
  kDecode,           // malformed image stream
  kSize,             // image or patch grid too small
  kShape,            // mismatched dimensions between operands
  kConfig,           // invalid configuration value or combination
  kStage,            // a pipeline stage failed (wraps backend diagnostics)
  kIntegrity,        // a result violated its contract
  kUnsolvable,       // harmonic fill without any known boundary
  kBackend,          // remote backend answered with an HTTP error
  kUnavailable,      // remote backend unreachable
  kProtocol,         // remote backend answered with the wrong shape
  kRequestTooLarge,  // payload exceeds the endpoint limit
  kValidation,       // request rejected client-side
  kSpec,             // invalid degradation spec
  kIo,               // filesystem failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qrefine
