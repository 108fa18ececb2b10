#pragma once

#include <stdexcept>
#include <string>

namespace privsynth {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix that must be (semi)definite is not, or a logdet argument is singular.
class NotPositiveDefiniteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnstableError : public std::runtime_error {
 public:
  UnstableError(const std::string& what, double spectral_radius)
      : std::runtime_error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No strictly feasible point exists (or none could be constructed). `constraint`
// names the block that could not be satisfied.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::string constraint)
      : std::runtime_error(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace privsynth
