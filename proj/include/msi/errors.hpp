#pragma once

#include <stdexcept>
#include <string>

namespace msi {

// Error taxonomy shared across the library. The CLI maps these onto its
// exit codes: ArgumentError/IndexError/ShapeError/ParseError/ValidationError
// are input problems (exit 2), TrainingDivergence is exit 3, DataError is a
// protocol/data mismatch (exit 4).

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed input file (JSON syntax, missing keys, wrong types).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates a graph/dataset invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data does not support the requested protocol (e.g. explanation metrics on
// graphs without ground-truth edges) or artifacts do not belong together.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace msi
