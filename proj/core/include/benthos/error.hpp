#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace benthos {

enum class ErrorKind {
  format,
  corrupt_file,
  io,
  out_of_range,
  precondition,
  incompatible_grid,
  degenerate_plate,
  degenerate_spectrum,
  no_intersection,
  not_found,
  conflict,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. The kind drives CLI exit codes and
/// HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace benthos
