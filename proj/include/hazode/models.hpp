#pragma once

// Hazard families driven by second-order ODEs, with their closed forms,
// positivity certificates and local stability analysis.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "hazode/ode.hpp"

namespace hazode {

// h'' + alpha h' + beta h = gamma
struct DampedOscParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double h0 = 0.0;
  double v0 = 0.0;

  double equilibrium() const noexcept { return gamma / beta; }
};

enum class DampingRegime { Underdamped, CriticallyDamped, Overdamped };

struct DampingClass {
  DampingRegime regime;
  double discriminant;  // alpha^2 - 4 beta
};

// h'' = r h (1 - h/K) - eta h'
struct PopDynParams {
  double r = 0.0;
  double K = 0.0;
  double eta = 0.0;
  double h0 = 0.0;
  double v0 = 0.0;

  double zeta() const;
  static PopDynParams from_zeta(double r, double K, double zeta, double h0, double v0);
};

// h'' = -omega^2 (h - c)
struct SinusoidalParams {
  double omega = 0.0;
  double c = 0.0;
  double h0 = 0.0;
  double v0 = 0.0;

  double amplitude() const;
};

// h'' = alpha h - beta (h')^2
struct ExpInteractionParams {
  double alpha = 0.0;
  double beta = 0.0;
  double h0 = 0.0;
  double v0 = 0.0;
};

std::string_view to_string(DampingRegime r);

DampingClass classify_damping(double alpha, double beta);

// Constants of the closed-form damped solution h(t) - h* in each regime.
struct DampedSolution {
  DampingRegime regime;
  double hstar;
  double A;
  double B;
  double decay;  // alpha/2
  double omega;  // underdamped only
  double r1;     // overdamped only
  double r2;

  double hazard(double t) const;
  double cumhaz(double t) const;
};

DampedSolution damped_solution(const DampedOscParams& p);
double damped_hazard_closed(double t, const DampedOscParams& p);
double damped_cumhaz_closed(double t, const DampedOscParams& p);
// Exact infimum of h over t >= 0 (checks every interior extremum that can be lowest).
double damped_min_hazard(const DampedOscParams& p);
VectorField damped_field(const DampedOscParams& p);

double sinusoidal_hazard(double t, const SinusoidalParams& p);
double sinusoidal_cumhaz(double t, const SinusoidalParams& p);
double sinusoidal_pdf(double t, const SinusoidalParams& p);
// c > h0/2 + v0^2/(2 h0 omega^2); throws InvalidParameters when h0 <= 0.
bool sinusoidal_positivity(const SinusoidalParams& p);
VectorField sinusoidal_field(const SinusoidalParams& p);

VectorField popdyn_field(const PopDynParams& p);

VectorField exp_interaction_field(const ExpInteractionParams& p);
double exp_beta0_hazard_closed(double t, const ExpInteractionParams& p);
double exp_beta0_cumhaz_closed(double t, const ExpInteractionParams& p);
// h0 >= |v0|/sqrt(alpha)
bool exp_beta0_positivity(const ExpInteractionParams& p);
// Finite limit of H when the growing mode vanishes (h0 = -v0/sqrt(alpha)); nullopt otherwise.
std::optional<double> exp_beta0_cumhaz_limit(const ExpInteractionParams& p);

double logistic_first_order_hazard(double t, double r, double K, double h0);
double logistic_first_order_cumhaz(double t, double r, double K, double h0);
// h' = r h (1 - h/K) carried in the h channel; v holds h'.
VectorField logistic_first_order_field(double r, double K);

// h'(t) = r h(t) (1 - h(t - tau)/K), constant history h0 on [-tau, 0].
// v stores h' evaluated at the grid points.
Trajectory delayed_logistic_solve(double r, double K, double tau, double h0, const TimeGrid& grid);

struct WeibullRef {
  double beta;
  double kappa;
};
struct LogNormalRef {
  double mu;
  double sigma;
};
using RiccatiReference = std::variant<WeibullRef, LogNormalRef>;

// Coefficient a(t) = f'(t)/f(t) of the Riccati form h' = a h + h^2.
double riccati_autonomy(const RiccatiReference& model, double t, double h);

enum class ModelFamily { DampedOscillator, PopulationDynamics, Sinusoidal, ExpInteraction };

std::string_view to_string(ModelFamily f);

// One of the four second-order hazard families.
class ModelSpec {
 public:
  using Params = std::variant<DampedOscParams, PopDynParams, SinusoidalParams, ExpInteractionParams>;

  ModelSpec(DampedOscParams p) : params_(p) {}
  ModelSpec(PopDynParams p) : params_(p) {}
  ModelSpec(SinusoidalParams p) : params_(p) {}
  ModelSpec(ExpInteractionParams p) : params_(p) {}

  const Params& params() const noexcept { return params_; }
  ModelFamily family() const noexcept;
  std::string name() const;

  State2 initial_state() const;
  VectorField vector_field() const;

  bool has_closed_form() const noexcept;
  // Closed forms; throw std::logic_error when has_closed_form() is false.
  double hazard(double t) const;
  double cumhaz(double t) const;

  // Empty when the parameters satisfy every analytic constraint of the family,
  // otherwise a description of the violated constraint. Families without an
  // analytic positivity certificate are additionally screened on trajectories.
  std::optional<std::string> validity_violation() const;
  bool valid() const { return !validity_violation().has_value(); }
  // Throws InvalidParameters with the violation message.
  void require_valid() const;

  // sup_t H(t) when it is finite (improper survival), otherwise nullopt.
  std::optional<double> cumhaz_limit() const;
  // Long-run hazard level lim h(t) where it exists (+inf for growing hazards).
  double asymptotic_hazard() const;

 private:
  Params params_;
};

struct StabilityReport {
  std::array<std::array<double, 2>, 2> jacobian;
  std::array<double, 2> eigen_real;

  bool asymptotically_stable() const noexcept { return eigen_real[0] < 0.0 && eigen_real[1] < 0.0; }
};

// J = [[0, 1], [dphi/dh, dphi/dv]] from analytic partials of the family.
StabilityReport stability_jacobian(const ModelSpec& model, const State2& at);

}  // namespace hazode
