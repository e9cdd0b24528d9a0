#include "hazode/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hazode/errors.hpp"
#include "hazode/rng.hpp"
#include "hazode/simd/kernels.hpp"

namespace hazode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

simd::Observations view(const PreparedData& d) { return {d.t, d.delta, d.log_t}; }

// log P(Z > z) for standard normal Z, stable far into the upper tail.
double log_normal_sf(double z) {
  const double q = 0.5 * std::erfc(z / std::numbers::sqrt2);
  if (q > 1e-300) return std::log(q);
  return -0.5 * z * z - std::log(z * std::sqrt(2.0 * std::numbers::pi));
}

double lognormal_loglik(const PreparedData& d, double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) return -kInf;
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma);
  double l = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double z = (d.log_t[i] - mu) / sigma;
    if (d.delta[i] > 0.5) {
      if (!std::isfinite(z)) return -kInf;
      l += -0.5 * z * z - log_norm - d.log_t[i];
    } else if (std::isfinite(z)) {
      l += log_normal_sf(z);
    }
  }
  return l;
}

double constant_loglik(const PreparedData& d, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) return -kInf;
  return d.events * std::log(c) - c * d.total_time;
}

std::string format_key(double x) { return format_double(x); }

}  // namespace

PreparedData prepare(const SurvivalDataset& data) {
  data.validate();
  PreparedData p;
  const std::size_t n = data.size();
  p.t = data.times;
  p.delta.resize(n);
  p.log_t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.delta[i] = data.events[i] ? 1.0 : 0.0;
    p.log_t[i] = std::log(p.t[i]);
    p.events += p.delta[i];
    p.total_time += p.t[i];
    p.max_time = std::max(p.max_time, p.t[i]);
  }
  return p;
}

double log_likelihood_trajectory(const ModelSpec& model, const PreparedData& data, double dt) {
  if (!model.valid() || data.size() == 0) return -kInf;
  std::optional<Trajectory> solved;
  try {
    solved = integrate(model.vector_field(), model.initial_state(), TimeGrid(0.0, data.max_time + dt, dt));
  } catch (const IntegrationBlowup&) {
    return -kInf;
  }
  const Trajectory& traj = *solved;
  if (traj.first_negative && *traj.first_negative <= data.max_time) return -kInf;
  double events = 0.0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.t[i];
    if (data.delta[i] > 0.5) {
      const double h = interp_linear(traj, Channel::Hazard, t);
      if (!(h > 0.0)) return -kInf;
      events += std::log(h);
    }
    cumulative += interp_linear(traj, Channel::CumHazard, t);
  }
  return events - cumulative;
}

double log_likelihood(const ModelSpec& model, const PreparedData& data, double dt) {
  if (data.size() == 0 || !model.valid()) return -kInf;
  const auto& k = simd::active_kernels();
  const auto obs = view(data);
  const auto& params = model.params();
  if (const auto* d = std::get_if<DampedOscParams>(&params)) return k.damped(obs, damped_solution(*d));
  if (const auto* s = std::get_if<SinusoidalParams>(&params)) return k.sinusoidal(obs, *s);
  if (const auto* e = std::get_if<ExpInteractionParams>(&params); e && e->beta == 0.0) return k.exp_beta0(obs, *e);
  return log_likelihood_trajectory(model, data, dt);
}

double log_likelihood(const ModelSpec& model, const SurvivalDataset& data, double dt) {
  return log_likelihood(model, prepare(data), dt);
}

std::string_view to_string(FitFamily f) {
  switch (f) {
    case FitFamily::Constant: return "constant";
    case FitFamily::Damped: return "damped";
    case FitFamily::CriticallyDamped: return "critical";
    case FitFamily::PopDyn: return "popdyn";
    case FitFamily::Sinusoidal: return "sinusoidal";
    case FitFamily::ExpBeta0: return "exp0";
    case FitFamily::ExpInteraction: return "exp";
    case FitFamily::Weibull: return "weibull";
    case FitFamily::LogNormal: return "lognormal";
  }
  return "?";
}

std::optional<FitFamily> parse_family(std::string_view name) {
  for (auto f : {FitFamily::Constant, FitFamily::Damped, FitFamily::CriticallyDamped, FitFamily::PopDyn,
                 FitFamily::Sinusoidal, FitFamily::ExpBeta0, FitFamily::ExpInteraction, FitFamily::Weibull,
                 FitFamily::LogNormal})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

const std::vector<ParamInfo>& family_parameters(FitFamily f) {
  static const std::vector<ParamInfo> constant{{"c", true}};
  static const std::vector<ParamInfo> damped{
      {"alpha", true}, {"beta", true}, {"gamma", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> critical{{"alpha", true}, {"gamma", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> popdyn{{"r", true}, {"zeta", true}, {"K", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> sinusoidal{{"omega", true}, {"c", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> exp0{{"alpha", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> exp{{"alpha", true}, {"beta", true}, {"h0", true}, {"v0", false}};
  static const std::vector<ParamInfo> weibull{{"beta", true}, {"kappa", true}};
  static const std::vector<ParamInfo> lognormal{{"mu", false}, {"sigma", true}};
  switch (f) {
    case FitFamily::Constant: return constant;
    case FitFamily::Damped: return damped;
    case FitFamily::CriticallyDamped: return critical;
    case FitFamily::PopDyn: return popdyn;
    case FitFamily::Sinusoidal: return sinusoidal;
    case FitFamily::ExpBeta0: return exp0;
    case FitFamily::ExpInteraction: return exp;
    case FitFamily::Weibull: return weibull;
    case FitFamily::LogNormal: return lognormal;
  }
  return constant;
}

std::size_t parameter_count(FitFamily f) { return family_parameters(f).size(); }

std::optional<ModelSpec> build_model(FitFamily f, std::span<const double> p) {
  if (p.size() != parameter_count(f)) throw InvalidParameters("wrong number of parameters for " + std::string(to_string(f)));
  switch (f) {
    case FitFamily::Constant: return ModelSpec(SinusoidalParams{1.0, p[0], p[0], 0.0});
    case FitFamily::Damped: return ModelSpec(DampedOscParams{p[0], p[1], p[2], p[3], p[4]});
    case FitFamily::CriticallyDamped: return ModelSpec(DampedOscParams{p[0], 0.25 * p[0] * p[0], p[1], p[2], p[3]});
    case FitFamily::PopDyn:
      return ModelSpec(PopDynParams::from_zeta(p[0], p[2], p[1], p[3], p[4]));
    case FitFamily::Sinusoidal: return ModelSpec(SinusoidalParams{p[0], p[1], p[2], p[3]});
    case FitFamily::ExpBeta0: return ModelSpec(ExpInteractionParams{p[0], 0.0, p[1], p[2]});
    case FitFamily::ExpInteraction: return ModelSpec(ExpInteractionParams{p[0], p[1], p[2], p[3]});
    case FitFamily::Weibull:
    case FitFamily::LogNormal: return std::nullopt;
  }
  return std::nullopt;
}

double family_log_likelihood(FitFamily f, std::span<const double> params, const PreparedData& data, double dt) {
  for (double x : params)
    if (!std::isfinite(x)) return -kInf;
  switch (f) {
    case FitFamily::Constant: return constant_loglik(data, params[0]);
    case FitFamily::Weibull:
      if (!(params[0] > 0.0 && params[1] > 0.0)) return -kInf;
      return simd::active_kernels().weibull(view(data), {params[0], params[1]});
    case FitFamily::LogNormal: return lognormal_loglik(data, params[0], params[1]);
    default: {
      const auto& info = family_parameters(f);
      for (std::size_t i = 0; i < info.size(); ++i)
        if (info[i].positive && !(params[i] > 0.0)) return -kInf;
      const auto model = build_model(f, params);
      return log_likelihood(*model, data, dt);
    }
  }
}

std::vector<double> to_unconstrained(FitFamily f, std::span<const double> params) {
  const auto& info = family_parameters(f);
  std::vector<double> z(params.begin(), params.end());
  for (std::size_t i = 0; i < info.size(); ++i)
    if (info[i].positive) z[i] = std::log(z[i]);
  return z;
}

std::vector<double> from_unconstrained(FitFamily f, std::span<const double> z) {
  const auto& info = family_parameters(f);
  std::vector<double> p(z.begin(), z.end());
  for (std::size_t i = 0; i < info.size(); ++i)
    if (info[i].positive) p[i] = std::exp(p[i]);
  return p;
}

double bic(double loglik, std::size_t k, std::size_t n) {
  return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglik;
}

FitResult mle_fit(FitFamily f, const PreparedData& data, std::span<const double> init, const FitOptions& opt) {
  const auto& info = family_parameters(f);
  if (init.size() != info.size())
    throw InvalidParameters("initial vector for " + std::string(to_string(f)) + " needs " +
                            std::to_string(info.size()) + " values");
  if (data.size() == 0) throw DataError("cannot fit an empty dataset");

  FitResult out;
  out.family = f;
  out.k = info.size();
  out.n = data.size();
  for (const auto& pi : info) {
    out.names.push_back(pi.name);
    out.log_transformed.push_back(pi.positive);
  }

  auto objective = [&](std::span<const double> z) {
    const auto p = from_unconstrained(f, z);
    return -family_log_likelihood(f, p, data, opt.dt);
  };

  std::vector<double> z0(init.size());
  bool init_ok = true;
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].positive && !(init[i] > 0.0)) init_ok = false;
    z0[i] = info[i].positive && init[i] > 0.0 ? std::log(init[i]) : init[i];
  }

  std::size_t evals = 0;
  std::size_t invalid_starts = 0;
  std::optional<NelderMeadResult> best;
  for (std::size_t s = 0; s < std::max<std::size_t>(opt.starts, 1); ++s) {
    CounterRng rng(opt.seed, s);
    std::vector<double> z = z0;
    bool ok = false;
    if (s == 0) {
      ok = init_ok && std::isfinite(objective(z));
      ++evals;
    } else {
      // Jittered starts are redrawn until they land on a finite likelihood.
      for (int attempt = 0; !ok && attempt < 50; ++attempt) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = z0[i] + opt.jitter * rng.normal();
        ok = std::isfinite(objective(z));
        ++evals;
      }
    }
    if (!ok) {
      ++invalid_starts;
      continue;
    }
    auto res = nelder_mead(objective, z, opt.simplex);
    evals += res.evals;
    if (!best || res.value < best->value) {
      best = std::move(res);
      out.best_start = s;
    }
  }

  out.n_evals = evals;
  if (!best || !std::isfinite(best->value)) {
    out.params.assign(init.begin(), init.end());
    out.loglik = -kInf;
    out.bic = kInf;
    out.converged = false;
    out.best_start = 0;
    out.diagnostics = "all " + std::to_string(opt.starts) + " starts diverged (no finite log-likelihood)";
    return out;
  }
  out.params = from_unconstrained(f, best->x);
  out.loglik = -best->value;
  out.bic = bic(out.loglik, out.k, out.n);
  out.converged = best->converged;
  if (!out.converged) out.diagnostics = "evaluation budget exhausted before the simplex contracted";
  if (invalid_starts > 0) {
    if (!out.diagnostics.empty()) out.diagnostics += "; ";
    out.diagnostics += std::to_string(invalid_starts) + " start(s) had no finite log-likelihood";
  }
  return out;
}

FitResult fit_weibull(const PreparedData& data, const FitOptions& opt) {
  if (data.events <= 0.0 || data.total_time <= 0.0) {
    const double init[] = {1.0, 1.0};
    FitResult r = mle_fit(FitFamily::Weibull, data, init, FitOptions{0, opt.jitter, opt.seed, opt.dt, opt.simplex});
    r.converged = false;
    r.loglik = -kInf;
    r.bic = kInf;
    r.diagnostics = "no events: the Weibull likelihood has no maximum";
    return r;
  }
  const double init[] = {data.events / data.total_time, 1.0};
  return mle_fit(FitFamily::Weibull, data, init, opt);
}

FitResult fit_lognormal(const PreparedData& data, const FitOptions& opt) {
  double mean = 0.0, m2 = 0.0, count = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.log_t[i])) continue;
    count += 1.0;
    const double d = data.log_t[i] - mean;
    mean += d / count;
    m2 += d * (data.log_t[i] - mean);
  }
  const double sd = count > 1.0 ? std::sqrt(m2 / count) : 1.0;
  const double init[] = {mean, sd > 0.0 ? sd : 1.0};
  if (data.events <= 0.0) {
    FitResult r = mle_fit(FitFamily::LogNormal, data, init, opt);
    r.converged = false;
    r.diagnostics = "no events: the log-normal likelihood has no maximum";
    return r;
  }
  return mle_fit(FitFamily::LogNormal, data, init, opt);
}

void write_fit_report(std::ostream& os, const FitResult& fit) {
  os << "family=" << to_string(fit.family) << '\n';
  os << "n=" << fit.n << '\n';
  os << "k=" << fit.k << '\n';
  os << "loglik=" << format_key(fit.loglik) << '\n';
  os << "bic=" << format_key(fit.bic) << '\n';
  os << "converged=" << (fit.converged ? "true" : "false") << '\n';
  os << "n_evals=" << fit.n_evals << '\n';
  os << "best_start=" << fit.best_start << '\n';
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    os << "param." << fit.names[i] << '=' << format_key(fit.params[i]) << '\n';
    os << "transform." << fit.names[i] << '=' << (fit.log_transformed[i] ? "log" : "identity") << '\n';
  }
  if (!fit.diagnostics.empty()) os << "diagnostics=" << fit.diagnostics << '\n';
}

double mgf_domain_bound(const ModelSpec& model) {
  if (model.cumhaz_limit()) return 0.0;
  struct Bound {
    double operator()(const DampedOscParams& p) const { return p.gamma / p.beta; }
    double operator()(const PopDynParams& p) const { return p.K; }
    double operator()(const SinusoidalParams& p) const { return p.c; }
    double operator()(const ExpInteractionParams&) const { return kInf; }
  };
  return std::visit(Bound{}, model.params());
}

namespace {

// Upper bound D on ∫_T^∞ (h* − h)_+ for the damped closed form, so that
// H(t) − H(T) ≥ h*(t − T) − D for t ≥ T.
double damped_slack(const DampedSolution& s, double T) {
  const double A = std::abs(s.A), B = std::abs(s.B);
  switch (s.regime) {
    case DampingRegime::Underdamped: return (A + B) * std::exp(-s.decay * T) / s.decay;
    case DampingRegime::CriticallyDamped: {
      const double k = s.decay;
      return (A / k + B * (T / k + 1.0 / (k * k))) * std::exp(-k * T);
    }
    case DampingRegime::Overdamped:
      return A * std::exp(s.r1 * T) / std::abs(s.r1) + B * std::exp(s.r2 * T) / std::abs(s.r2);
  }
  return kInf;
}

}  // namespace

MgfResult mgf(const ModelSpec& model, double s, double dt, double tail_tol, double max_horizon) {
  model.require_valid();
  if (!(dt > 0.0) || !std::isfinite(s)) throw InvalidParameters("mgf: s must be finite and dt positive");
  const double bound = mgf_domain_bound(model);
  MgfResult out{s, kNaN, false, bound, 0.0, 0.0};
  if (s >= bound) {
    out.divergent = true;
    return out;
  }

  std::vector<double> h, H;
  for (double T = 50.0; T <= max_horizon * (1.0 + 1e-12); T *= 2.0) {
    const std::size_t N = 2 * static_cast<std::size_t>(std::ceil(T / (2.0 * dt)));
    const double Tn = static_cast<double>(N) * dt;
    h.resize(N + 1);
    H.resize(N + 1);
    if (model.has_closed_form()) {
      for (std::size_t i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) * dt;
        h[i] = model.hazard(t);
        H[i] = model.cumhaz(t);
      }
    } else {
      try {
        Trajectory traj = integrate(model.vector_field(), model.initial_state(), TimeGrid(0.0, Tn, dt));
        h = std::move(traj.h);
        H = std::move(traj.H);
      } catch (const IntegrationBlowup& e) {
        throw NumericalFailure(std::string("mgf: trajectory blew up: ") + e.what());
      }
    }

    // log of the tail bound e^{sT} S(T) (1 + s e^D / (m − s)), with m a hazard floor on [T, ∞).
    double log_tail = s * Tn - H[N];
    if (s > 0.0) {
      double m = 0.0, slack = 0.0;
      const auto& params = model.params();
      if (const auto* d = std::get_if<DampedOscParams>(&params)) {
        m = d->gamma / d->beta;
        slack = damped_slack(damped_solution(*d), Tn);
      } else if (const auto* sp = std::get_if<SinusoidalParams>(&params)) {
        m = sp->c;
        slack = 2.0 * sp->amplitude() / sp->omega;
      } else {
        m = *std::min_element(h.begin() + static_cast<std::ptrdiff_t>(N / 2), h.end());
      }
      if (!(m > s)) continue;
      log_tail += std::log1p(s * std::exp(slack) / (m - s));
    }
    if (!(log_tail < std::log(tail_tol))) continue;

    auto f = [&](std::size_t i) { return h[i] * std::exp(s * static_cast<double>(i) * dt - H[i]); };
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < N; i += 2) odd += f(i);
    for (std::size_t i = 2; i < N; i += 2) even += f(i);
    out.value = dt / 3.0 * (f(0) + 4.0 * odd + 2.0 * even + f(N));
    out.truncation = Tn;
    out.tail_bound = std::exp(log_tail);
    return out;
  }
  throw NumericalFailure("mgf: tail bound stays above " + format_double(tail_tol) + " up to t = " +
                         format_double(max_horizon) + " for s = " + format_double(s));
}

void write_mgf_sweep(std::ostream& os, std::span<const MgfResult> rows) {
  os << "s,value,divergent\n";
  for (const auto& r : rows)
    os << format_double(r.s) << ',' << (r.divergent ? std::string("inf") : format_double(r.value)) << ','
       << (r.divergent ? 1 : 0) << '\n';
}

InitEstimate init_from_survival(const SurvivalDataset& data, double window) {
  data.validate();
  if (!(window > 0.0)) throw InvalidParameters("init window must be positive");
  double early_events = 0.0, exposure = 0.0;
  double t_min = kInf, t_max = -kInf;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.times[i];
    if (t <= window && data.events[i]) early_events += 1.0;
    exposure += std::min(t, window);
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  if (!(exposure > 0.0)) throw DataError("init_from_survival: no follow-up time inside the window");

  InitEstimate est{};
  est.lambda_hat = early_events / exposure;
  const double dt = window;
  const double S0 = 1.0;
  const double S1 = std::exp(-est.lambda_hat * dt);
  const double S2 = std::exp(-2.0 * est.lambda_hat * dt);
  const double S3 = std::exp(-3.0 * est.lambda_hat * dt);
  const double d1 = S1 - S0;
  const double d2 = S2 - 2.0 * S1 + S0;
  const double d3 = S3 - 3.0 * S2 + 3.0 * S1 - S0;
  const double dt2 = dt * dt, dt3 = dt2 * dt;

  est.h0 = -d1 / (dt * S0);
  est.v0 = (d1 / (dt * S1)) * (d1 / (dt * S1)) - d2 / (dt2 * S1);
  est.hpp0 = -d3 / (dt3 * S1) + 3.0 * d2 * d1 / (dt3 * S1 * S1) - 2.0 * d1 * d1 * d1 / (dt3 * S1 * S1 * S1);
  const double total = data.total_time();
  est.c0 = total > 0.0 ? static_cast<double>(data.event_count()) / total : 0.0;

  const double radicand = -est.hpp0 / (est.h0 - est.c0);
  if (radicand > 0.0 && std::isfinite(radicand)) {
    est.omega0 = std::sqrt(radicand);
  } else {
    est.omega_fallback = true;
    const double range = t_max - t_min;
    est.omega0 = range > 0.0 ? 2.0 * std::numbers::pi / range : 1.0;
  }
  return est;
}

std::vector<double> sinusoidal_start(const InitEstimate& est) {
  const double omega = est.omega0 > 0.0 ? est.omega0 : 1.0;
  double h0 = est.h0 > 0.0 ? est.h0 : std::max(est.c0, 1e-3);
  double c = est.c0;
  const double floor = h0 / 2.0 + est.v0 * est.v0 / (2.0 * h0 * omega * omega);
  if (!(c > floor)) c = 1.1 * floor + 1e-6;
  return {omega, c, h0, est.v0};
}

}  // namespace hazode
