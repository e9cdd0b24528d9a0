#pragma once

// Fixed-step RK4 engine for two-state hazard systems (h, v = h').
// The cumulative hazard is accumulated alongside by the trapezoidal rule.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hazode {

inline constexpr double kDefaultDt = 1e-3;

// Uniform grid; t_i = t0 + i*dt is always computed from the index.
class TimeGrid {
 public:
  // n_steps = round((t_end - t0)/dt). Throws InvalidParameters on dt <= 0 or t_end <= t0.
  TimeGrid(double t0, double t_end, double dt);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double t_end() const noexcept { return time(n_steps_); }

 private:
  double t0_;
  double dt_;
  std::size_t n_steps_;
};

struct State2 {
  double h = 0.0;  // hazard
  double v = 0.0;  // dh/dt

  bool finite() const noexcept;
};

// (state, t) -> (h', v'). For second-order hazards h' = v and v' = phi(h, v, t).
using VectorField = std::function<State2(const State2&, double)>;

enum class Channel { Hazard, Slope, CumHazard };

struct Trajectory {
  TimeGrid grid;
  std::vector<double> h;
  std::vector<double> v;
  std::vector<double> H;
  // Time of the first grid point with h < 0, if any.
  std::optional<double> first_negative;

  std::span<const double> channel(Channel c) const noexcept;
  bool hazard_nonnegative() const noexcept { return !first_negative.has_value(); }
};

State2 rk4_step(const State2& state, double t, double dt, const VectorField& field);

Trajectory integrate(const VectorField& field, const State2& init, const TimeGrid& grid);

// out[0] = 0, out[i] = out[i-1] + dt*(values[i-1] + values[i])/2
std::vector<double> cumulative_trapezoid(std::span<const double> values, double dt);

// Piecewise-linear interpolation; exact at grid nodes. Throws RangeError outside [t0, t_end].
double interp_linear(const Trajectory& traj, Channel channel, double t);

}  // namespace hazode
