#include "common/errors.hpp"

namespace mgh {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::internal: return "internal";
    case ErrorKind::config: return "config";
    case ErrorKind::file: return "file";
    case ErrorKind::transport: return "transport";
    case ErrorKind::validation: return "validation";
    case ErrorKind::format: return "format";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::contract: return "contract";
    case ErrorKind::shape: return "shape";
    case ErrorKind::degenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace mgh
