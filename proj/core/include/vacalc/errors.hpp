#pragma once

#include <stdexcept>
#include <string>

namespace vacalc {

// Error taxonomy maps onto the CLI exit codes: data/parse problems are
// distinguishable from numeric/estimation failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files, bad schemas, bad configs.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally valid data that violates a precondition (missing cause labels,
// empty datasets, K mismatch, ...).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numeric failures: singular systems, degenerate solutions, all subsets
// skipped, bootstrap failure rates over threshold.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace vacalc
