#pragma once

// Event-time generation by cumulative-hazard inversion and censored dataset synthesis.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hazode/dataset.hpp"
#include "hazode/models.hpp"
#include "hazode/ode.hpp"

namespace hazode {

struct InversionConfig {
  double initial_horizon = 50.0;
  double growth = 2.0;
  double max_horizon = 6400.0;
  double tolerance = 1e-8;  // time units
  double dt = kDefaultDt;

  void validate() const;
};

// Holds the integrated trajectory of one model and inverts H(t*) = -log(1 - u).
// The horizon is extended geometrically on demand.
class EventTimeSampler {
 public:
  EventTimeSampler(ModelSpec model, InversionConfig cfg = {});

  // +inf when the model's cumulative hazard is bounded below the target (improper mass).
  double draw(double u);
  // Extends the horizon once so that every u in the batch can be inverted without mutation.
  std::vector<double> draw_all(std::span<const double> us);

  const Trajectory& trajectory() const noexcept { return traj_; }
  const ModelSpec& model() const noexcept { return model_; }

 private:
  // Makes H(horizon) >= target, or returns false if the target is beyond a bounded H.
  bool ensure_reaches(double target);
  double invert(double target) const;
  void integrate_to(double horizon);

  ModelSpec model_;
  InversionConfig cfg_;
  std::optional<double> limit_;
  Trajectory traj_;
};

double simulate_event_time(const ModelSpec& model, double u, const InversionConfig& cfg = {});

struct CensoringSpec {
  enum class Kind { None, Uniform };
  Kind kind = Kind::None;
  double c_max = 0.0;
  // Administrative end of follow-up applied on top of random censoring.
  std::optional<double> horizon;

  static CensoringSpec none() { return {}; }
  static CensoringSpec uniform(double c_max) { return {Kind::Uniform, c_max, std::nullopt}; }
};

// Substream layout of a simulated dataset.
inline constexpr std::uint64_t kEventStream = 0;
inline constexpr std::uint64_t kCensorStream = 1;

SurvivalDataset simulate_dataset(const ModelSpec& model, std::size_t n, const CensoringSpec& censor,
                                 std::uint64_t seed, const InversionConfig& cfg = {});

// Bisection on c_max against common pilot draws until the censoring rate is within
// 0.02 of the target. Throws NumericalFailure if the target is unattainable.
double tune_cmax(const ModelSpec& model, double target_rate, std::size_t n_pilot, std::uint64_t seed,
                 const InversionConfig& cfg = {});

}  // namespace hazode
