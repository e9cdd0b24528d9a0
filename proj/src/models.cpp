#include "hazode/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hazode/errors.hpp"

namespace hazode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameters(what);
}

void require_damped(const DampedOscParams& p) {
  require(p.alpha > 0.0 && std::isfinite(p.alpha), "damped oscillator: alpha must be positive");
  require(p.beta > 0.0 && std::isfinite(p.beta), "damped oscillator: beta must be positive");
  require(std::isfinite(p.gamma) && std::isfinite(p.h0) && std::isfinite(p.v0),
          "damped oscillator: parameters must be finite");
}

}  // namespace

double PopDynParams::zeta() const { return eta / std::sqrt(r); }

PopDynParams PopDynParams::from_zeta(double r, double K, double zeta, double h0, double v0) {
  return {r, K, zeta * std::sqrt(r), h0, v0};
}

double SinusoidalParams::amplitude() const {
  const double d = h0 - c;
  const double s = v0 / omega;
  return std::sqrt(d * d + s * s);
}

std::string_view to_string(DampingRegime r) {
  switch (r) {
    case DampingRegime::Underdamped: return "underdamped";
    case DampingRegime::CriticallyDamped: return "critically-damped";
    case DampingRegime::Overdamped: return "overdamped";
  }
  return "?";
}

DampingClass classify_damping(double alpha, double beta) {
  require(alpha > 0.0 && beta > 0.0, "classify_damping: alpha and beta must be positive");
  const double a2 = alpha * alpha;
  const double disc = a2 - 4.0 * beta;
  const double band = 1e-12 * std::max(a2, 4.0 * beta);
  if (std::abs(disc) <= band) return {DampingRegime::CriticallyDamped, disc};
  return {disc < 0.0 ? DampingRegime::Underdamped : DampingRegime::Overdamped, disc};
}

DampedSolution damped_solution(const DampedOscParams& p) {
  require_damped(p);
  const DampingClass cls = classify_damping(p.alpha, p.beta);
  DampedSolution s{};
  s.regime = cls.regime;
  s.hstar = p.gamma / p.beta;
  s.decay = 0.5 * p.alpha;
  const double d = p.h0 - s.hstar;
  switch (cls.regime) {
    case DampingRegime::Underdamped:
      s.omega = 0.5 * std::sqrt(-cls.discriminant);
      s.A = d;
      s.B = (p.v0 + s.decay * d) / s.omega;
      break;
    case DampingRegime::CriticallyDamped:
      s.A = d;
      s.B = p.v0 + s.decay * d;
      break;
    case DampingRegime::Overdamped: {
      const double root = std::sqrt(0.25 * cls.discriminant);
      s.r1 = -s.decay + root;
      s.r2 = -s.decay - root;
      s.A = (p.v0 - s.r2 * d) / (s.r1 - s.r2);
      s.B = d - s.A;
      break;
    }
  }
  return s;
}

double DampedSolution::hazard(double t) const {
  switch (regime) {
    case DampingRegime::Underdamped:
      return std::exp(-decay * t) * (A * std::cos(omega * t) + B * std::sin(omega * t)) + hstar;
    case DampingRegime::CriticallyDamped:
      return (A + B * t) * std::exp(-decay * t) + hstar;
    case DampingRegime::Overdamped:
      return A * std::exp(r1 * t) + B * std::exp(r2 * t) + hstar;
  }
  return 0.0;
}

double DampedSolution::cumhaz(double t) const {
  switch (regime) {
    case DampingRegime::Underdamped: {
      // beta = decay^2 + omega^2
      const double beta = decay * decay + omega * omega;
      const double e = std::exp(-decay * t);
      const double c = std::cos(omega * t);
      const double s = std::sin(omega * t);
      return hstar * t + (A / beta) * (decay + e * (-decay * c + omega * s)) +
             (B / beta) * (omega + e * (-decay * s - omega * c));
    }
    case DampingRegime::CriticallyDamped: {
      const double k = decay;
      const double em1 = -std::expm1(-k * t);  // 1 - e^{-kt}
      const double e = std::exp(-k * t);
      return hstar * t + A * em1 / k + B * (em1 - k * t * e) / (k * k);
    }
    case DampingRegime::Overdamped:
      return hstar * t + A * std::expm1(r1 * t) / r1 + B * std::expm1(r2 * t) / r2;
  }
  return 0.0;
}

double damped_hazard_closed(double t, const DampedOscParams& p) { return damped_solution(p).hazard(t); }

double damped_cumhaz_closed(double t, const DampedOscParams& p) { return damped_solution(p).cumhaz(t); }

double damped_min_hazard(const DampedOscParams& p) {
  const DampedSolution s = damped_solution(p);
  double lo = std::min(p.h0, s.hstar);
  auto consider = [&](double t) {
    if (t > 0.0 && std::isfinite(t)) lo = std::min(lo, s.hazard(t));
  };
  switch (s.regime) {
    case DampingRegime::Underdamped: {
      // (h - h*)' = e^{-kt} (P cos wt - Q sin wt); extrema where tan(wt) = P/Q.
      // Deviations shrink with each half period, so the first two extrema bound the rest.
      const double P = s.omega * s.B - s.decay * s.A;
      const double Q = s.decay * s.B + s.omega * s.A;
      if (P == 0.0 && Q == 0.0) break;
      double phi = std::atan2(P, Q);
      if (phi <= 0.0) phi += std::numbers::pi;
      const double t1 = phi / s.omega;
      consider(t1);
      consider(t1 + std::numbers::pi / s.omega);
      break;
    }
    case DampingRegime::CriticallyDamped:
      if (s.B != 0.0) consider(1.0 / s.decay - s.A / s.B);
      break;
    case DampingRegime::Overdamped: {
      if (s.A != 0.0) {
        const double ratio = -s.B * s.r2 / (s.A * s.r1);
        if (ratio > 0.0) consider(std::log(ratio) / (s.r1 - s.r2));
      }
      break;
    }
  }
  return lo;
}

VectorField damped_field(const DampedOscParams& p) {
  require_damped(p);
  return [a = p.alpha, b = p.beta, g = p.gamma](const State2& s, double) {
    return State2{s.v, -a * s.v - b * s.h + g};
  };
}

namespace {

void require_sinusoidal(const SinusoidalParams& p) {
  require(p.omega > 0.0 && std::isfinite(p.omega), "sinusoidal: omega must be positive");
  require(std::isfinite(p.c) && std::isfinite(p.h0) && std::isfinite(p.v0),
          "sinusoidal: parameters must be finite");
}

}  // namespace

double sinusoidal_hazard(double t, const SinusoidalParams& p) {
  require_sinusoidal(p);
  const double wt = p.omega * t;
  return (p.h0 - p.c) * std::cos(wt) + (p.v0 / p.omega) * std::sin(wt) + p.c;
}

double sinusoidal_cumhaz(double t, const SinusoidalParams& p) {
  require_sinusoidal(p);
  const double wt = p.omega * t;
  return p.c * t + (p.h0 - p.c) / p.omega * std::sin(wt) +
         p.v0 / (p.omega * p.omega) * (1.0 - std::cos(wt));
}

double sinusoidal_pdf(double t, const SinusoidalParams& p) {
  return sinusoidal_hazard(t, p) * std::exp(-sinusoidal_cumhaz(t, p));
}

bool sinusoidal_positivity(const SinusoidalParams& p) {
  require_sinusoidal(p);
  require(p.h0 > 0.0, "sinusoidal positivity: requires h0 > 0");
  return p.c > 0.5 * p.h0 + p.v0 * p.v0 / (2.0 * p.h0 * p.omega * p.omega);
}

VectorField sinusoidal_field(const SinusoidalParams& p) {
  require_sinusoidal(p);
  return [w2 = p.omega * p.omega, c = p.c](const State2& s, double) {
    return State2{s.v, -w2 * (s.h - c)};
  };
}

VectorField popdyn_field(const PopDynParams& p) {
  require(p.r > 0.0 && p.K > 0.0 && p.eta > 0.0, "population dynamics: r, K, eta must be positive");
  return [r = p.r, K = p.K, eta = p.eta](const State2& s, double) {
    return State2{s.v, r * s.h * (1.0 - s.h / K) - eta * s.v};
  };
}

VectorField exp_interaction_field(const ExpInteractionParams& p) {
  require(p.alpha > 0.0, "exponential interaction: alpha must be positive");
  require(p.beta >= 0.0, "exponential interaction: beta must be non-negative");
  return [a = p.alpha, b = p.beta](const State2& s, double) {
    return State2{s.v, a * s.h - b * s.v * s.v};
  };
}

double exp_beta0_hazard_closed(double t, const ExpInteractionParams& p) {
  require(p.alpha > 0.0, "exponential model: alpha must be positive");
  const double s = std::sqrt(p.alpha);
  const double grow = 0.5 * (p.h0 + p.v0 / s);
  const double decay = 0.5 * (p.h0 - p.v0 / s);
  return grow * std::exp(s * t) + decay * std::exp(-s * t);
}

double exp_beta0_cumhaz_closed(double t, const ExpInteractionParams& p) {
  require(p.alpha > 0.0, "exponential model: alpha must be positive");
  const double s = std::sqrt(p.alpha);
  const double grow = 0.5 * (p.h0 + p.v0 / s);
  const double decay = 0.5 * (p.h0 - p.v0 / s);
  return grow / s * std::expm1(s * t) - decay / s * std::expm1(-s * t);
}

bool exp_beta0_positivity(const ExpInteractionParams& p) {
  require(p.alpha > 0.0, "exponential model: alpha must be positive");
  return p.h0 >= std::abs(p.v0) / std::sqrt(p.alpha);
}

std::optional<double> exp_beta0_cumhaz_limit(const ExpInteractionParams& p) {
  require(p.alpha > 0.0, "exponential model: alpha must be positive");
  const double s = std::sqrt(p.alpha);
  const double grow = 0.5 * (p.h0 + p.v0 / s);
  const double scale = std::abs(p.h0) + std::abs(p.v0 / s);
  if (std::abs(grow) > 1e-12 * scale) return std::nullopt;
  return 0.5 * (p.h0 - p.v0 / s) / s;
}

double logistic_first_order_hazard(double t, double r, double K, double h0) {
  require(r > 0.0 && K > 0.0 && h0 > 0.0, "first-order logistic: r, K, h0 must be positive");
  // K h0 e^{rt} / (K + h0 (e^{rt} - 1)), rewritten to avoid overflow for large rt.
  const double em = std::exp(-r * t);
  return K * h0 / (K * em + h0 * (1.0 - em));
}

double logistic_first_order_cumhaz(double t, double r, double K, double h0) {
  require(r > 0.0 && K > 0.0 && h0 > 0.0, "first-order logistic: r, K, h0 must be positive");
  // (K/r) log(1 + h0 (e^{rt} - 1)/K) = K t + (K/r) log((K e^{-rt} + h0 (1 - e^{-rt}))/K)
  const double em = std::exp(-r * t);
  return K * t + (K / r) * std::log((K * em + h0 * (1.0 - em)) / K);
}

VectorField logistic_first_order_field(double r, double K) {
  require(r > 0.0 && K > 0.0, "first-order logistic: r, K must be positive");
  return [r, K](const State2& s, double) {
    const double dh = r * s.h * (1.0 - s.h / K);
    return State2{dh, r * dh * (1.0 - 2.0 * s.h / K)};
  };
}

Trajectory delayed_logistic_solve(double r, double K, double tau, double h0, const TimeGrid& grid) {
  require(r > 0.0 && K > 0.0 && h0 > 0.0, "delayed logistic: r, K, h0 must be positive");
  const double dt = grid.dt();
  if (!(tau >= dt * (1.0 - 1e-9))) throw InvalidParameters("delayed logistic: tau must be at least dt");

  const std::size_t n = grid.size();
  Trajectory traj{grid, std::vector<double>(n), std::vector<double>(n), {}, std::nullopt};
  std::vector<double>& h = traj.h;
  h[0] = h0;

  // History lookup; the lag of every stage falls at or before the last computed node.
  auto lagged = [&](double t, std::size_t computed) {
    const double s = t - tau;
    if (s <= grid.t0()) return h0;
    const double x = (s - grid.t0()) / dt;
    auto i = static_cast<std::size_t>(std::floor(x));
    if (i >= computed) return h[computed];
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * h[i] + w * h[i + 1];
  };
  auto rate = [&](double hv, double t, std::size_t computed) {
    return r * hv * (1.0 - lagged(t, computed) / K);
  };

  for (std::size_t i = 1; i < n; ++i) {
    const double t = grid.time(i - 1);
    const std::size_t known = i - 1;
    const double y = h[i - 1];
    const double k1 = rate(y, t, known);
    const double k2 = rate(y + 0.5 * dt * k1, t + 0.5 * dt, known);
    const double k3 = rate(y + 0.5 * dt * k2, t + 0.5 * dt, known);
    const double k4 = rate(y + dt * k3, t + dt, known);
    h[i] = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(h[i])) throw IntegrationBlowup(t, "delayed logistic: non-finite state");
    if (h[i] < 0.0 && !traj.first_negative) traj.first_negative = grid.time(i);
  }
  for (std::size_t i = 0; i < n; ++i) traj.v[i] = rate(h[i], grid.time(i), i);
  traj.H = cumulative_trapezoid(h, dt);
  return traj;
}

double riccati_autonomy(const RiccatiReference& model, double t, double h) {
  if (!(t > 0.0)) throw InvalidParameters("riccati_autonomy: t must be positive");
  if (const auto* w = std::get_if<WeibullRef>(&model)) {
    require(w->beta > 0.0 && w->kappa > 0.0, "riccati_autonomy: Weibull beta and kappa must be positive");
    require(w->kappa != 1.0, "riccati_autonomy: Weibull kappa = 1 (exponential) has no autonomy coefficient");
    require(h > 0.0, "riccati_autonomy: Weibull branch needs h > 0");
    const double k = w->kappa;
    return (k - 1.0) * std::pow(w->beta * k / h, 1.0 / (k - 1.0)) - h;
  }
  const auto& ln = std::get<LogNormalRef>(model);
  require(ln.sigma > 0.0, "riccati_autonomy: log-normal sigma must be positive");
  const double s2 = ln.sigma * ln.sigma;
  return (ln.mu - s2 - std::log(t)) / (s2 * t);
}

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::DampedOscillator: return "damped";
    case ModelFamily::PopulationDynamics: return "popdyn";
    case ModelFamily::Sinusoidal: return "sinusoidal";
    case ModelFamily::ExpInteraction: return "exp";
  }
  return "?";
}

ModelFamily ModelSpec::family() const noexcept { return static_cast<ModelFamily>(params_.index()); }

std::string ModelSpec::name() const {
  std::string out(to_string(family()));
  if (const auto* d = std::get_if<DampedOscParams>(&params_)) {
    if (d->alpha > 0.0 && d->beta > 0.0)
      out += "/" + std::string(to_string(classify_damping(d->alpha, d->beta).regime));
  }
  return out;
}

State2 ModelSpec::initial_state() const {
  return std::visit([](const auto& p) { return State2{p.h0, p.v0}; }, params_);
}

VectorField ModelSpec::vector_field() const {
  struct Visitor {
    VectorField operator()(const DampedOscParams& p) const { return damped_field(p); }
    VectorField operator()(const PopDynParams& p) const { return popdyn_field(p); }
    VectorField operator()(const SinusoidalParams& p) const { return sinusoidal_field(p); }
    VectorField operator()(const ExpInteractionParams& p) const { return exp_interaction_field(p); }
  };
  return std::visit(Visitor{}, params_);
}

bool ModelSpec::has_closed_form() const noexcept {
  switch (family()) {
    case ModelFamily::DampedOscillator:
    case ModelFamily::Sinusoidal: return true;
    case ModelFamily::PopulationDynamics: return false;
    case ModelFamily::ExpInteraction: return std::get<ExpInteractionParams>(params_).beta == 0.0;
  }
  return false;
}

double ModelSpec::hazard(double t) const {
  if (!has_closed_form()) throw std::logic_error("ModelSpec::hazard: no closed form for " + name());
  if (const auto* d = std::get_if<DampedOscParams>(&params_)) return damped_hazard_closed(t, *d);
  if (const auto* s = std::get_if<SinusoidalParams>(&params_)) return sinusoidal_hazard(t, *s);
  return exp_beta0_hazard_closed(t, std::get<ExpInteractionParams>(params_));
}

double ModelSpec::cumhaz(double t) const {
  if (!has_closed_form()) throw std::logic_error("ModelSpec::cumhaz: no closed form for " + name());
  if (const auto* d = std::get_if<DampedOscParams>(&params_)) return damped_cumhaz_closed(t, *d);
  if (const auto* s = std::get_if<SinusoidalParams>(&params_)) return sinusoidal_cumhaz(t, *s);
  return exp_beta0_cumhaz_closed(t, std::get<ExpInteractionParams>(params_));
}

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::optional<std::string> violation(const DampedOscParams& p) {
  if (!all_finite({p.alpha, p.beta, p.gamma, p.h0, p.v0})) return "parameters must be finite";
  if (!(p.alpha > 0.0)) return "alpha > 0 required";
  if (!(p.beta > 0.0)) return "beta > 0 required";
  if (!(p.gamma >= 0.0)) return "equilibrium gamma/beta >= 0 required";
  if (!(p.h0 >= 0.0)) return "h0 >= 0 required";
  if (damped_min_hazard(p) < 0.0) return "hazard becomes negative (min_t h(t) < 0)";
  return std::nullopt;
}

std::optional<std::string> violation(const PopDynParams& p) {
  if (!all_finite({p.r, p.K, p.eta, p.h0, p.v0})) return "parameters must be finite";
  if (!(p.r > 0.0)) return "r > 0 required";
  if (!(p.K > 0.0)) return "K > 0 required";
  if (!(p.eta > 0.0)) return "eta > 0 required";
  if (!(p.h0 > 0.0)) return "h0 > 0 required";
  return std::nullopt;
}

std::optional<std::string> violation(const SinusoidalParams& p) {
  if (!all_finite({p.omega, p.c, p.h0, p.v0})) return "parameters must be finite";
  if (!(p.omega > 0.0)) return "omega > 0 required";
  if (!(p.h0 > 0.0)) return "h0 > 0 required";
  if (!sinusoidal_positivity(p)) return "positivity requires c > h0/2 + v0^2/(2 h0 omega^2)";
  return std::nullopt;
}

std::optional<std::string> violation(const ExpInteractionParams& p) {
  if (!all_finite({p.alpha, p.beta, p.h0, p.v0})) return "parameters must be finite";
  if (!(p.alpha > 0.0)) return "alpha > 0 required";
  if (!(p.beta >= 0.0)) return "beta >= 0 required";
  if (!(p.h0 > 0.0)) return "h0 > 0 required";
  if (p.beta == 0.0 && !exp_beta0_positivity(p)) return "positivity requires h0 >= |v0|/sqrt(alpha)";
  return std::nullopt;
}

}  // namespace

std::optional<std::string> ModelSpec::validity_violation() const {
  return std::visit([](const auto& p) { return violation(p); }, params_);
}

void ModelSpec::require_valid() const {
  if (auto v = validity_violation()) throw InvalidParameters(name() + ": " + *v);
}

std::optional<double> ModelSpec::cumhaz_limit() const {
  if (const auto* e = std::get_if<ExpInteractionParams>(&params_)) {
    if (e->beta == 0.0 && e->alpha > 0.0) return exp_beta0_cumhaz_limit(*e);
    return std::nullopt;
  }
  if (const auto* d = std::get_if<DampedOscParams>(&params_)) {
    if (d->gamma == 0.0 && d->alpha > 0.0 && d->beta > 0.0) {
      const DampedSolution s = damped_solution(*d);
      switch (s.regime) {
        case DampingRegime::Underdamped: {
          const double beta = s.decay * s.decay + s.omega * s.omega;
          return (s.A * s.decay + s.B * s.omega) / beta;
        }
        case DampingRegime::CriticallyDamped: return s.A / s.decay + s.B / (s.decay * s.decay);
        case DampingRegime::Overdamped: return -s.A / s.r1 - s.B / s.r2;
      }
    }
  }
  return std::nullopt;
}

double ModelSpec::asymptotic_hazard() const {
  struct Visitor {
    double operator()(const DampedOscParams& p) const { return p.gamma / p.beta; }
    double operator()(const PopDynParams& p) const { return p.K; }
    double operator()(const SinusoidalParams& p) const { return p.c; }
    double operator()(const ExpInteractionParams& p) const {
      if (p.beta == 0.0 && exp_beta0_cumhaz_limit(p)) return 0.0;
      return kInf;
    }
  };
  return std::visit(Visitor{}, params_);
}

StabilityReport stability_jacobian(const ModelSpec& model, const State2& at) {
  if (!at.finite()) throw InvalidParameters("stability_jacobian: state must be finite");
  struct Partials {
    const State2& s;
    std::array<double, 2> operator()(const DampedOscParams& p) const { return {-p.beta, -p.alpha}; }
    std::array<double, 2> operator()(const PopDynParams& p) const {
      return {p.r * (1.0 - 2.0 * s.h / p.K), -p.eta};
    }
    std::array<double, 2> operator()(const SinusoidalParams& p) const { return {-p.omega * p.omega, 0.0}; }
    std::array<double, 2> operator()(const ExpInteractionParams& p) const { return {p.alpha, -2.0 * p.beta * s.v}; }
  };
  const auto d = std::visit(Partials{at}, model.params());
  StabilityReport rep{};
  rep.jacobian = {{{0.0, 1.0}, {d[0], d[1]}}};
  // Characteristic polynomial: l^2 - tr l + det, with tr = d1 and det = -d0.
  const double half_tr = 0.5 * d[1];
  const double det = -d[0];
  const double disc = half_tr * half_tr - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    rep.eigen_real = {half_tr + root, half_tr - root};
  } else {
    rep.eigen_real = {half_tr, half_tr};
  }
  return rep;
}

}  // namespace hazode
