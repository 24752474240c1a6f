#include "qrefine/error.hpp"

namespace qrefine {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDecode: return "decode error";
    case ErrorKind::kSize: return "size error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kStage: return "stage error";
    case ErrorKind::kIntegrity: return "integrity error";
    case ErrorKind::kUnsolvable: return "unsolvable";
    case ErrorKind::kBackend: return "backend error";
    case ErrorKind::kUnavailable: return "backend unavailable";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kRequestTooLarge: return "request too large";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kSpec: return "spec error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace qrefine
