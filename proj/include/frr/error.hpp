#pragma once

#include <stdexcept>
#include <string>

namespace frr {

/// Malformed or inconsistent input data (missing file, bad cell, arity mismatch).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensors or rows whose shape does not match the model they are used with.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite loss during training.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}

  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

}  // namespace frr
