#include <cmath>
#include <limits>

#include "hazode/simd/kernels.hpp"

namespace hazode::simd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class Eval>
double accumulate(const Observations& obs, Eval&& eval) {
  double events = 0.0;
  double cumulative = 0.0;
  const std::size_t n = obs.t.size();
  for (std::size_t i = 0; i < n; ++i) {
    double h = 0.0;
    double H = 0.0;
    eval(i, h, H);
    if (obs.delta[i] > 0.5) {
      if (!(h > 0.0)) return kNegInf;
      events += std::log(h);
    }
    cumulative += H;
  }
  return events - cumulative;
}

double damped(const Observations& obs, const DampedSolution& s) {
  switch (s.regime) {
    case DampingRegime::Underdamped: {
      const double beta = s.decay * s.decay + s.omega * s.omega;
      const double a_over_b = s.A / beta;
      const double b_over_b = s.B / beta;
      return accumulate(obs, [&](std::size_t i, double& h, double& H) {
        const double t = obs.t[i];
        const double e = std::exp(-s.decay * t);
        const double c = std::cos(s.omega * t);
        const double sn = std::sin(s.omega * t);
        h = e * (s.A * c + s.B * sn) + s.hstar;
        H = s.hstar * t + a_over_b * (s.decay + e * (s.omega * sn - s.decay * c)) +
            b_over_b * (s.omega - e * (s.decay * sn + s.omega * c));
      });
    }
    case DampingRegime::CriticallyDamped: {
      const double k = s.decay;
      return accumulate(obs, [&](std::size_t i, double& h, double& H) {
        const double t = obs.t[i];
        const double em1 = -std::expm1(-k * t);
        const double e = 1.0 - em1;
        h = (s.A + s.B * t) * e + s.hstar;
        H = s.hstar * t + s.A * em1 / k + s.B * (em1 - k * t * e) / (k * k);
      });
    }
    case DampingRegime::Overdamped:
      return accumulate(obs, [&](std::size_t i, double& h, double& H) {
        const double t = obs.t[i];
        const double m1 = std::expm1(s.r1 * t);
        const double m2 = std::expm1(s.r2 * t);
        h = s.A * (m1 + 1.0) + s.B * (m2 + 1.0) + s.hstar;
        H = s.hstar * t + s.A * m1 / s.r1 + s.B * m2 / s.r2;
      });
  }
  return kNegInf;
}

double sinusoidal(const Observations& obs, const SinusoidalParams& p) {
  const double d = p.h0 - p.c;
  const double vw = p.v0 / p.omega;
  const double dw = d / p.omega;
  const double vw2 = p.v0 / (p.omega * p.omega);
  return accumulate(obs, [&](std::size_t i, double& h, double& H) {
    const double t = obs.t[i];
    const double c = std::cos(p.omega * t);
    const double s = std::sin(p.omega * t);
    h = d * c + vw * s + p.c;
    H = p.c * t + dw * s + vw2 * (1.0 - c);
  });
}

double exp_beta0(const Observations& obs, const ExpInteractionParams& p) {
  const double root = std::sqrt(p.alpha);
  const double grow = 0.5 * (p.h0 + p.v0 / root);
  const double decay = 0.5 * (p.h0 - p.v0 / root);
  return accumulate(obs, [&](std::size_t i, double& h, double& H) {
    const double t = obs.t[i];
    const double m1 = std::expm1(root * t);
    const double m2 = std::expm1(-root * t);
    h = grow * (m1 + 1.0) + decay * (m2 + 1.0);
    H = (grow * m1 - decay * m2) / root;
  });
}

double weibull(const Observations& obs, const WeibullCoeffs& w) {
  const double log_bk = std::log(w.beta * w.kappa);
  double events = 0.0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < obs.t.size(); ++i) {
    const double lt = obs.log_t[i];
    if (obs.delta[i] > 0.5) events += log_bk + (w.kappa - 1.0) * lt;
    cumulative += w.beta * std::exp(w.kappa * lt);
  }
  return events - cumulative;
}

constexpr KernelTable kScalar{&damped, &sinusoidal, &exp_beta0, &weibull};

}  // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalar; }
}  // namespace detail

}  // namespace hazode::simd
