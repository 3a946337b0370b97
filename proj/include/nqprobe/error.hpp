#pragma once

#include <stdexcept>
#include <string>

namespace nqprobe {

// Thrown when an argument violates an operation's precondition (empty image,
// out-of-range level, negative histogram mass, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown for a malformed ProbeConfig (zero replicas, non-positive sigma).
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training diverged: the loss became non-finite.
class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace nqprobe
