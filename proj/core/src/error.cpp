#include "benthos/error.hpp"

namespace benthos {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::corrupt_file: return "corrupt-file";
    case ErrorKind::io: return "io";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::incompatible_grid: return "incompatible-grid";
    case ErrorKind::degenerate_plate: return "degenerate-plate";
    case ErrorKind::degenerate_spectrum: return "degenerate-spectrum";
    case ErrorKind::no_intersection: return "no-intersection";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::conflict: return "conflict";
  }
  return "unknown";
}

}  // namespace benthos
