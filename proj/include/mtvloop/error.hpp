#pragma once

#include <stdexcept>
#include <string>

namespace mtvloop {

// Exit codes used by the command-line driver.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::data)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed inputs, files, or arguments that violate a precondition.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, ExitCode::data) {}
};

// Non-finite values or numerically degenerate configurations.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, ExitCode::numeric) {}
};

#define MTV_REQUIRE(cond, msg)                  \
  do {                                          \
    if (!(cond)) throw ::mtvloop::DataError(msg); \
  } while (0)

}  // namespace mtvloop
