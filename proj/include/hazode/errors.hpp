#pragma once

#include <stdexcept>
#include <string>

namespace hazode {

// Parameter set violates a model's validity constraints.
class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Runge-Kutta stage produced a non-finite value.
class IntegrationBlowup : public std::runtime_error {
 public:
  IntegrationBlowup(double t, const std::string& what)
      : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Query outside the domain covered by a trajectory or function.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Inversion could not bracket the target before the horizon limit.
class HorizonExhausted : public std::runtime_error {
 public:
  HorizonExhausted(double cumhaz_at_max, double target, const std::string& what)
      : std::runtime_error(what), cumhaz_at_max_(cumhaz_at_max), target_(target) {}
  double cumhaz_at_max() const noexcept { return cumhaz_at_max_; }
  double target() const noexcept { return target_; }

 private:
  double cumhaz_at_max_;
  double target_;
};

// Malformed or unusable survival data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Optimizer, tuner or sampler failed to produce a usable answer.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hazode
