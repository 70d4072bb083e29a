#pragma once

#include <stdexcept>
#include <string>

namespace lsstruct {

// Invalid numeric argument (negative rate, index out of range, n < 2 ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structurally unusable model input, e.g. an empty reference panel.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Locus counts or vector lengths disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The copying model has no mass to copy from (n1 + alpha * n2 == 0) or an
// undefined mutation rate.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API used out of order, e.g. stepping a forward state at the wrong locus.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input file. The message carries file, line and column.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsstruct
