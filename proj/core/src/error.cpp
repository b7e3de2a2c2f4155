#include "s3fn/error.hpp"

namespace s3fn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::format: return "format error";
    case Errc::truncation: return "truncation error";
    case Errc::data: return "data error";
    case Errc::validation: return "validation error";
    case Errc::parse: return "parse error";
    case Errc::shape: return "shape error";
    case Errc::size: return "size error";
    case Errc::index: return "index error";
    case Errc::parameter: return "parameter error";
    case Errc::config: return "configuration error";
    case Errc::io: return "I/O error";
    case Errc::degenerate: return "degenerate-data error";
    case Errc::numeric: return "numeric failure";
  }
  return "error";
}

int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::parameter:
    case Errc::config:
      return 2;
    case Errc::degenerate:
    case Errc::numeric:
      return 4;
    default:
      return 3;
  }
}

}  // namespace s3fn
