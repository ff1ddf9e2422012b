#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfh {

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Grid or dimension mismatch between objects that must agree.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A coefficient returned a non-finite value.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State left the configured bound (or became non-finite) during integration.
struct BlowUpError : NumericError {
  BlowUpError(std::size_t step, std::size_t particle, const std::string& what)
      : NumericError(what), step(step), particle(particle) {}
  std::size_t step;
  std::size_t particle;
};

}  // namespace mfh
