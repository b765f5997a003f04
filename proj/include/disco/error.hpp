#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace disco {

/// Machine-readable category carried by every rejection.
enum class ErrorKind {
  Io,
  Format,
  Rate,
  Truncation,
  Validation,
  Size,
  Geometry,
  Infeasible,
  Sampling,
  Degenerate,
  Conditioning,
  Resolution,
  Protocol,
  Empty,
  Pairing,
  Config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace disco
