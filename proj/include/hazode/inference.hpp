#pragma once

// Censored likelihood, maximum-likelihood fitting, information criteria,
// moment generating functions and data-driven starting values.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hazode/dataset.hpp"
#include "hazode/models.hpp"
#include "hazode/ode.hpp"
#include "hazode/optimize.hpp"

namespace hazode {

// Observations in structure-of-arrays form, shared by every likelihood evaluation.
struct PreparedData {
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<double> log_t;
  double events = 0.0;
  double total_time = 0.0;
  double max_time = 0.0;

  std::size_t size() const noexcept { return t.size(); }
};

PreparedData prepare(const SurvivalDataset& data);

// Σ δ_i log h(t_i) − Σ H(t_i). Closed forms are used when the family has them,
// otherwise one trajectory is integrated to max t_i and interpolated.
// Returns −inf for invalid parameters or a non-positive hazard at an event.
double log_likelihood(const ModelSpec& model, const PreparedData& data, double dt = kDefaultDt);
double log_likelihood(const ModelSpec& model, const SurvivalDataset& data, double dt = kDefaultDt);
// Always takes the trajectory path (consistency checks against the closed forms).
double log_likelihood_trajectory(const ModelSpec& model, const PreparedData& data, double dt = kDefaultDt);

enum class FitFamily {
  Constant,          // c
  Damped,            // alpha, beta, gamma, h0, v0
  CriticallyDamped,  // alpha, gamma, h0, v0 with beta = alpha^2/4
  PopDyn,            // r, zeta, K, h0, v0
  Sinusoidal,        // omega, c, h0, v0
  ExpBeta0,          // alpha, h0, v0
  ExpInteraction,    // alpha, beta, h0, v0
  Weibull,           // beta, kappa: h = beta kappa t^(kappa-1)
  LogNormal,         // mu, sigma of log T
};

struct ParamInfo {
  std::string name;
  bool positive;  // log-transformed in fitting, Gamma prior in MCMC
};

std::string_view to_string(FitFamily f);
std::optional<FitFamily> parse_family(std::string_view name);
const std::vector<ParamInfo>& family_parameters(FitFamily f);
std::size_t parameter_count(FitFamily f);

// Second-order model for an ODE family; nullopt for Weibull and log-normal.
std::optional<ModelSpec> build_model(FitFamily f, std::span<const double> params);

// Log-likelihood of a family at natural-scale parameters; −inf when invalid.
double family_log_likelihood(FitFamily f, std::span<const double> params, const PreparedData& data,
                             double dt = kDefaultDt);

// Log-transform of positive parameters, identity otherwise.
std::vector<double> to_unconstrained(FitFamily f, std::span<const double> params);
std::vector<double> from_unconstrained(FitFamily f, std::span<const double> z);

struct FitOptions {
  std::size_t starts = 5;  // the first start is the supplied init, the rest are jittered
  double jitter = 0.25;    // SD of the perturbation in unconstrained coordinates
  std::uint64_t seed = 20240517;
  double dt = kDefaultDt;
  NelderMeadOptions simplex{};
};

struct FitResult {
  FitFamily family;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<bool> log_transformed;
  double loglik;
  double bic;
  std::size_t k;
  std::size_t n;
  std::size_t n_evals;
  bool converged;
  std::size_t best_start;
  std::string diagnostics;
};

double bic(double loglik, std::size_t k, std::size_t n);

FitResult mle_fit(FitFamily f, const PreparedData& data, std::span<const double> init, const FitOptions& opt = {});
FitResult fit_weibull(const PreparedData& data, const FitOptions& opt = {});
FitResult fit_lognormal(const PreparedData& data, const FitOptions& opt = {});

void write_fit_report(std::ostream& os, const FitResult& fit);

struct MgfResult {
  double s;
  double value;  // NaN when divergent
  bool divergent;
  double domain_bound;
  double truncation;  // upper quadrature limit T (0 when no quadrature ran)
  double tail_bound;  // bound on the integral beyond T
};

// Supremum of the existence domain of E[e^{sT}]; +inf for an unbounded domain,
// 0 for improper distributions (divergent for every s > 0).
double mgf_domain_bound(const ModelSpec& model);

// Composite Simpson on the uniform grid of step dt over [0, T], with T doubled
// until the analytic tail bound is below tail_tol. Throws NumericalFailure when no
// admissible T up to max_horizon exists.
MgfResult mgf(const ModelSpec& model, double s, double dt = 1e-2, double tail_tol = 1e-8,
              double max_horizon = 6400.0);

void write_mgf_sweep(std::ostream& os, std::span<const MgfResult> rows);

struct InitEstimate {
  double lambda_hat;
  double h0;
  double v0;
  double hpp0;
  double c0;
  double omega0;
  bool omega_fallback;  // radicand was not positive, omega0 = 2π/range(t)
};

// Starting values from a local exponential anchor S(kΔt) = exp(−k λ̂ Δt), k = 1, 2, 3.
InitEstimate init_from_survival(const SurvivalDataset& data, double window = 1.0 / 12.0);

// Sinusoidal start (omega, c, h0, v0), with c raised when needed to satisfy positivity.
std::vector<double> sinusoidal_start(const InitEstimate& est);

}  // namespace hazode
