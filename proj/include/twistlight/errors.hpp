#pragma once

#include <stdexcept>
#include <string>

namespace twistlight {

/// A grid too coarse for the requested feature (waist, period, lens chirp).
class SamplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arrays that must share a grid do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A diagnostic was asked to interpret data it cannot (zero field, no ring, ...).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace twistlight
