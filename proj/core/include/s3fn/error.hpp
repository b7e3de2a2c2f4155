#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s3fn {

enum class Errc {
  format,      // bad magic / malformed header or row
  truncation,  // payload shorter or longer than declared
  data,        // non-finite values, empty datasets
  validation,  // semantic check failed (duplicates, unknown labels)
  parse,       // unparsable token
  shape,       // tensor / vector dimension mismatch
  size,        // cube smaller than one patch
  index,       // class index out of range
  parameter,   // argument outside its domain
  config,      // missing or inconsistent configuration
  io,          // filesystem failure
  degenerate,  // numerically degenerate input (zero variance, < 2 rows)
  numeric,     // non-finite values produced during computation
};

std::string_view to_string(Errc code) noexcept;

/// Process exit code for an error category: 2 usage, 3 data/format, 4 numeric.
int exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace s3fn
