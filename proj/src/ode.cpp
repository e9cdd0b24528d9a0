#include "hazode/ode.hpp"

#include <cmath>
#include <sstream>

#include "hazode/errors.hpp"

namespace hazode {

TimeGrid::TimeGrid(double t0, double t_end, double dt) : t0_(t0), dt_(dt), n_steps_(0) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameters("time grid: dt must be positive");
  if (!(t_end > t0) || !std::isfinite(t_end) || !std::isfinite(t0))
    throw InvalidParameters("time grid: t_end must exceed t0");
  const double steps = std::round((t_end - t0) / dt);
  n_steps_ = steps < 1.0 ? 1 : static_cast<std::size_t>(steps);
}

bool State2::finite() const noexcept { return std::isfinite(h) && std::isfinite(v); }

std::span<const double> Trajectory::channel(Channel c) const noexcept {
  switch (c) {
    case Channel::Hazard: return h;
    case Channel::Slope: return v;
    case Channel::CumHazard: return H;
  }
  return h;
}

namespace {

State2 axpy(const State2& s, double a, const State2& k) { return {s.h + a * k.h, s.v + a * k.v}; }

[[noreturn]] void blowup(double t) {
  std::ostringstream os;
  os << "integration blow-up: non-finite RK4 stage at t=" << t;
  throw IntegrationBlowup(t, os.str());
}

}  // namespace

State2 rk4_step(const State2& state, double t, double dt, const VectorField& field) {
  if (!state.finite()) blowup(t);
  const double half = 0.5 * dt;
  const State2 k1 = field(state, t);
  if (!k1.finite()) blowup(t);
  const State2 k2 = field(axpy(state, half, k1), t + half);
  if (!k2.finite()) blowup(t);
  const State2 k3 = field(axpy(state, half, k2), t + half);
  if (!k3.finite()) blowup(t);
  const State2 k4 = field(axpy(state, dt, k3), t + dt);
  if (!k4.finite()) blowup(t);
  const double w = dt / 6.0;
  State2 next{state.h + w * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h),
              state.v + w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
  if (!next.finite()) blowup(t);
  return next;
}

Trajectory integrate(const VectorField& field, const State2& init, const TimeGrid& grid) {
  const std::size_t n = grid.size();
  Trajectory traj{grid, {}, {}, {}, std::nullopt};
  traj.h.resize(n);
  traj.v.resize(n);
  traj.H.resize(n);
  traj.h[0] = init.h;
  traj.v[0] = init.v;
  traj.H[0] = 0.0;
  if (init.h < 0.0) traj.first_negative = grid.time(0);

  const double dt = grid.dt();
  State2 s = init;
  for (std::size_t i = 1; i < n; ++i) {
    s = rk4_step(s, grid.time(i - 1), dt, field);
    traj.h[i] = s.h;
    traj.v[i] = s.v;
    traj.H[i] = traj.H[i - 1] + 0.5 * dt * (traj.h[i - 1] + traj.h[i]);
    if (s.h < 0.0 && !traj.first_negative) traj.first_negative = grid.time(i);
  }
  return traj;
}

std::vector<double> cumulative_trapezoid(std::span<const double> values, double dt) {
  if (!(dt > 0.0)) throw InvalidParameters("cumulative_trapezoid: dt must be positive");
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  out[0] = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i)
    out[i] = out[i - 1] + 0.5 * dt * (values[i - 1] + values[i]);
  return out;
}

double interp_linear(const Trajectory& traj, Channel channel, double t) {
  const TimeGrid& g = traj.grid;
  if (!(t >= g.t0()) || !(t <= g.t_end())) {
    std::ostringstream os;
    os << "interp_linear: t=" << t << " outside [" << g.t0() << ", " << g.t_end() << "]";
    throw RangeError(os.str());
  }
  const auto values = traj.channel(channel);
  const double x = (t - g.t0()) / g.dt();
  const auto nearest = static_cast<std::size_t>(std::llround(x));
  if (nearest < values.size() && g.time(nearest) == t) return values[nearest];
  auto i = static_cast<std::size_t>(std::floor(x));
  if (i >= g.n_steps()) i = g.n_steps() - 1;
  const double w = (t - g.time(i)) / g.dt();
  return (1.0 - w) * values[i] + w * values[i + 1];
}

}  // namespace hazode
