#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace mrk {

/// Failure categories. The Python module maps each one to a host exception type.
enum class ErrorCode {
  Format,           // malformed file contents
  Unsupported,      // valid file, feature not handled
  Validation,       // data violates a type invariant
  DegenerateInput,  // input admits no meaningful result (e.g. zero variance)
  InvalidArgument,  // parameter outside its documented range
  GridMismatch,     // operands live on different grids / class counts
  Config,           // configuration file problems
  Io,
  Overflow,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <typename... Args>
[[noreturn]] void fail(ErrorCode code, fmt::format_string<Args...> format, Args&&... args) {
  throw Error(code, fmt::format(format, std::forward<Args>(args)...));
}

/// Writes a one-line warning to stderr.
void log_warning(std::string_view message);

}  // namespace mrk
