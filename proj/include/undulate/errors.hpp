#pragma once

#include <stdexcept>
#include <string>

namespace undulate {

/// |n*| fell below the renormalization threshold: a point defect formed.
class DefectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Energy rose across a step of a descent flow even after time-step halving.
class EnergyIncreaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line or configuration input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace undulate
