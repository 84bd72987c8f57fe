#ifndef VSTRESS_ERROR_HPP
#define VSTRESS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vstress {

// Exit codes used by the CLI: 2 for input/validation problems, 3 for
// numerical failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (bad header, bad token, wrong shape).
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally valid input that violates a precondition or invariant.
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Degenerate numerics: singular covariance, zero variance, empty zones.
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace vstress

#endif
