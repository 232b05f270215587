#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bregsnn {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or parameter update detected; training is aborted.
struct DivergenceError : std::runtime_error {
  std::size_t epoch = 0;
  std::size_t step = 0;
  DivergenceError(const std::string& msg, std::size_t epoch_, std::size_t step_)
      : std::runtime_error(msg), epoch(epoch_), step(step_) {}
};

}  // namespace bregsnn
