#include "disco/error.hpp"

namespace disco {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Rate: return "rate";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Size: return "size";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Empty: return "empty";
    case ErrorKind::Pairing: return "pairing";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace disco
