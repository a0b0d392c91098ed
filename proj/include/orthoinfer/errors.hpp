#pragma once

#include <stdexcept>
#include <string>

namespace orthoinfer {

// Input/configuration problems: bad files, bad flags, schema violations.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: singular systems, non-convergence, identity violations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Combinatorial guards: work refused because it would not terminate usefully.
class SizingError : public std::runtime_error {
 public:
  explicit SizingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace orthoinfer
