#pragma once

#include <stdexcept>
#include <string>

namespace tsqn {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorCode {
  Config,      ///< invalid configuration or precondition on user input
  Data,        ///< malformed or inconsistent data rows
  Numeric,     ///< quadrature / iteration failed to reach tolerance
  Assumption,  ///< a model assumption is violated for the data at hand
  Domain,      ///< argument outside the mathematical domain of an operation
  Mode,        ///< operation needs information this run does not have (e.g. true parameter)
  Schema,      ///< file schema or version mismatch
  Parse,       ///< non-numeric or truncated cell in a data file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numeric failure that also carries the tolerance actually achieved.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved)
      : Error(ErrorCode::Numeric, what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

const char* to_string(ErrorCode code) noexcept;

/// 0 ok, 2 config, 3 data, 4 numeric, 5 assumption.
int exit_code(ErrorCode code) noexcept;

}  // namespace tsqn
