#include "fxctl/error.hpp"

namespace fxctl {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::unknown_parameter: return "unknown_parameter";
    case ErrorKind::range_violation: return "range_violation";
    case ErrorKind::unknown_node: return "unknown_node";
    case ErrorKind::locked: return "locked";
    case ErrorKind::render: return "render";
    case ErrorKind::transport: return "transport";
    case ErrorKind::fixture_miss: return "fixture_miss";
    case ErrorKind::pipeline: return "pipeline";
    case ErrorKind::session: return "session";
    case ErrorKind::binding_mismatch: return "binding_mismatch";
    case ErrorKind::version_mismatch: return "version_mismatch";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace fxctl
