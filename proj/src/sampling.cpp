#include "hazode/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hazode/errors.hpp"
#include "hazode/rng.hpp"

namespace hazode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double target_of(double u) {
  if (!(u >= 0.0 && u < 1.0)) throw InvalidParameters("inversion: u must lie in [0, 1)");
  return -std::log1p(-u);
}

}  // namespace

void InversionConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidParameters("inversion: tolerance must be positive");
  if (!(growth > 1.0)) throw InvalidParameters("inversion: horizon growth factor must exceed 1");
  if (!(initial_horizon > 0.0) || !(max_horizon >= initial_horizon))
    throw InvalidParameters("inversion: need 0 < initial horizon <= max horizon");
  if (!(dt > 0.0)) throw InvalidParameters("inversion: dt must be positive");
}

EventTimeSampler::EventTimeSampler(ModelSpec model, InversionConfig cfg)
    : model_(std::move(model)), cfg_(cfg), traj_{TimeGrid(0.0, 1.0, 1.0), {}, {}, {}, std::nullopt} {
  cfg_.validate();
  model_.require_valid();
  limit_ = model_.cumhaz_limit();
  integrate_to(cfg_.initial_horizon);
}

void EventTimeSampler::integrate_to(double horizon) {
  traj_ = integrate(model_.vector_field(), model_.initial_state(), TimeGrid(0.0, horizon, cfg_.dt));
  if (traj_.first_negative) {
    std::ostringstream os;
    os << model_.name() << ": hazard becomes negative at t=" << *traj_.first_negative;
    throw InvalidParameters(os.str());
  }
}

bool EventTimeSampler::ensure_reaches(double target) {
  if (limit_ && *limit_ <= target) return false;
  while (traj_.H.back() < target) {
    const double horizon = traj_.grid.t_end();
    if (horizon >= cfg_.max_horizon) {
      std::ostringstream os;
      os << model_.name() << ": cumulative hazard " << traj_.H.back() << " at max horizon " << horizon
         << " is below the inversion target " << target;
      throw HorizonExhausted(traj_.H.back(), target, os.str());
    }
    integrate_to(std::min(horizon * cfg_.growth, cfg_.max_horizon));
  }
  return true;
}

double EventTimeSampler::invert(double target) const {
  if (target <= 0.0) return 0.0;
  const auto& H = traj_.H;
  const TimeGrid& g = traj_.grid;
  // First node with H >= target; the root lies in the cell that ends there.
  const auto hi_it = std::lower_bound(H.begin(), H.end(), target);
  const auto hi = static_cast<std::size_t>(hi_it - H.begin());
  if (H[hi] == target) return g.time(hi);
  const std::size_t lo = hi - 1;
  const double h_lo = H[lo];
  const double slope = (H[hi] - h_lo) / g.dt();
  double a = g.time(lo);
  double b = g.time(hi);
  while (b - a > cfg_.tolerance) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (h_lo + slope * (mid - g.time(lo)) < target) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

double EventTimeSampler::draw(double u) {
  const double target = target_of(u);
  if (target == 0.0) return 0.0;
  if (!ensure_reaches(target)) return kInf;
  return invert(target);
}

std::vector<double> EventTimeSampler::draw_all(std::span<const double> us) {
  std::vector<double> targets(us.size());
  double reach = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    targets[i] = target_of(us[i]);
    if (!(limit_ && *limit_ <= targets[i])) reach = std::max(reach, targets[i]);
  }
  ensure_reaches(reach);
  std::vector<double> out(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (limit_ && *limit_ <= targets[i]) out[i] = kInf;
    else out[i] = invert(targets[i]);
  }
  return out;
}

double simulate_event_time(const ModelSpec& model, double u, const InversionConfig& cfg) {
  EventTimeSampler sampler(model, cfg);
  return sampler.draw(u);
}

SurvivalDataset simulate_dataset(const ModelSpec& model, std::size_t n, const CensoringSpec& censor,
                                 std::uint64_t seed, const InversionConfig& cfg) {
  if (n < 1) throw InvalidParameters("simulate_dataset: n must be at least 1");
  if (censor.kind == CensoringSpec::Kind::Uniform && !(censor.c_max > 0.0))
    throw InvalidParameters("simulate_dataset: c_max must be positive");
  if (censor.horizon && !(*censor.horizon > 0.0))
    throw InvalidParameters("simulate_dataset: administrative horizon must be positive");

  std::vector<double> us(n);
  for (std::size_t i = 0; i < n; ++i) us[i] = uniform_at(seed, kEventStream, i);
  EventTimeSampler sampler(model, cfg);
  const std::vector<double> event_times = sampler.draw_all(us);

  SurvivalDataset data;
  data.meta.model = model.name();
  data.meta.seed = seed;
  if (censor.kind == CensoringSpec::Kind::Uniform) data.meta.c_max = censor.c_max;
  data.times.resize(n);
  data.events.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double limit = kInf;
    if (censor.kind == CensoringSpec::Kind::Uniform) limit = censor.c_max * uniform_at(seed, kCensorStream, i);
    if (censor.horizon) limit = std::min(limit, *censor.horizon);
    const double t = event_times[i];
    if (std::isinf(t) && std::isinf(limit)) {
      throw InvalidParameters(model.name() +
                              ": improper survival distribution (boundary case h0 = -v0/sqrt(alpha), bounded "
                              "cumulative hazard); some subjects never fail, so an administrative horizon or "
                              "censoring is required");
    }
    if (t <= limit) {
      data.times[i] = t;
      data.events[i] = 1;
    } else {
      data.times[i] = limit;
      data.events[i] = 0;
    }
  }
  return data;
}

double tune_cmax(const ModelSpec& model, double target_rate, std::size_t n_pilot, std::uint64_t seed,
                 const InversionConfig& cfg) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) throw InvalidParameters("tune_cmax: target must lie in (0, 1)");
  if (n_pilot < 1) throw InvalidParameters("tune_cmax: pilot size must be positive");

  std::vector<double> us(n_pilot);
  std::vector<double> cs(n_pilot);
  for (std::size_t i = 0; i < n_pilot; ++i) {
    us[i] = uniform_at(seed, kEventStream, i);
    cs[i] = uniform_at(seed, kCensorStream, i);
  }
  EventTimeSampler sampler(model, cfg);
  const std::vector<double> t = sampler.draw_all(us);

  // Common random numbers make the censoring rate non-increasing in c_max.
  const auto rate = [&](double c_max) {
    std::size_t censored = 0;
    for (std::size_t i = 0; i < n_pilot; ++i) censored += (c_max * cs[i] < t[i]) ? 1 : 0;
    return static_cast<double>(censored) / static_cast<double>(n_pilot);
  };

  double finite_max = 0.0;
  for (double x : t)
    if (std::isfinite(x)) finite_max = std::max(finite_max, x);
  double hi = std::max(finite_max, 1e-12);
  double lo = hi;
  while (rate(hi) > target_rate) {
    if (hi > 1e12 * std::max(1.0, finite_max)) {
      std::ostringstream os;
      os << model.name() << ": censoring rate cannot fall to " << target_rate << " (floor " << rate(hi)
         << " from subjects that never fail)";
      throw NumericalFailure(os.str());
    }
    hi *= 2.0;
  }
  while (rate(lo) <= target_rate && lo > 1e-300) lo *= 0.5;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = rate(mid);
    if (std::abs(r - target_rate) <= 0.002 || hi - lo <= 1e-12 * hi) return mid;
    if (r > target_rate) lo = mid;
    else hi = mid;
  }
  const double r = rate(hi);
  if (std::abs(r - target_rate) > 0.02) {
    std::ostringstream os;
    os << model.name() << ": censoring target " << target_rate << " unattainable (closest " << r << ")";
    throw NumericalFailure(os.str());
  }
  return hi;
}

}  // namespace hazode
