#pragma once

// Bayesian posterior sampling by component-wise adaptive random-walk Metropolis,
// and the replicated simulation study built on it.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hazode/inference.hpp"
#include "hazode/sampling.hpp"

namespace hazode {

struct PriorComponent {
  enum class Kind { Gamma, Normal };
  Kind kind;
  double a;  // Gamma shape / Normal mean
  double b;  // Gamma rate / Normal SD

  double log_density(double x) const;
  double mean() const { return kind == Kind::Gamma ? a / b : a; }
};

struct PriorSpec {
  std::vector<PriorComponent> components;

  // Gamma(2, 2) on positive parameters, Normal(0, 1) on sign-free ones.
  static PriorSpec defaults(FitFamily f);
  double log_density(std::span<const double> params) const;
  std::vector<double> means() const;
};

double log_posterior(FitFamily f, std::span<const double> params, const PreparedData& data, const PriorSpec& prior,
                     double dt = kDefaultDt);

struct ChainConfig {
  std::size_t iterations = 60000;
  std::size_t burn_in = 10000;
  std::size_t thin = 5;
  double initial_scale = 0.1;  // proposal SD per component in unconstrained coordinates
  double target_acceptance = 0.3;
  std::size_t adaptation_window = 500;
  std::uint64_t seed = 1;
  double dt = kDefaultDt;
  std::optional<std::vector<double>> init;       // natural-scale starting point
  std::optional<std::vector<double>> mle_start;  // where the MLE search for the default start begins

  void validate() const;
  std::size_t retained() const { return (iterations - burn_in) / thin; }
};

struct PosteriorChain {
  std::vector<std::string> names;
  std::vector<double> draws;  // row-major, retained() rows
  std::size_t dim = 0;
  double acceptance_rate = 0.0;  // post-burn-in, all components
  std::vector<double> component_acceptance;
  std::vector<double> scales;  // frozen proposal scales
  std::vector<double> init;
  std::string init_source;  // "user", "mle" or "prior-mean"
  std::string diagnostics;

  std::size_t rows() const noexcept { return dim ? draws.size() / dim : 0; }
  double at(std::size_t row, std::size_t j) const { return draws[row * dim + j]; }
  std::vector<double> column(std::size_t j) const;
};

// Log-density on unconstrained coordinates, including any Jacobian terms.
using LogTarget = std::function<double(std::span<const double>)>;

// Component-blocked random-walk Metropolis on z. Scales adapt by Robbins-Monro toward
// the target acceptance during burn-in and are frozen afterwards. Returned draws are in z.
PosteriorChain run_metropolis(const LogTarget& target, std::vector<double> z0, const ChainConfig& cfg);

// Samples the posterior of a family; draws are returned on the natural scale.
PosteriorChain run_chain(FitFamily f, const PreparedData& data, const PriorSpec& prior, const ChainConfig& cfg);

struct ParamSummary {
  std::string name;
  double mean;
  double sd;
  double q025;
  double q50;
  double q975;
  double mcse;  // batch-means Monte Carlo standard error of the mean
};

std::vector<ParamSummary> posterior_summary(const PosteriorChain& chain);
PosteriorChain merge_chains(const PosteriorChain& a, const PosteriorChain& b);
// Standard error of the mean of an autocorrelated series from sqrt(n) batches.
double batch_means_se(std::span<const double> x);

struct StudyConfig {
  FitFamily family = FitFamily::Damped;
  std::vector<double> truth;
  std::vector<std::size_t> n_grid{2000};
  std::size_t replications = 50;
  std::optional<double> censor_target = 0.25;
  std::size_t pilot_size = 10000;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> replication_seeds;  // overrides the derived per-replication seeds when non-empty
  ChainConfig chain{};
  InversionConfig inversion{};
  std::size_t jobs = 1;
  double max_failure_fraction = 0.10;
};

struct StudyRow {
  std::size_t n;
  double c_max;  // 0 without censoring
  std::size_t completed;
  std::size_t failed;
  std::vector<double> mean;  // average posterior mean per parameter
  std::vector<double> rmse;
  std::vector<double> bias;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> posterior_means;  // per completed replication
  std::vector<std::string> failures;
};

struct StudyResult {
  FitFamily family;
  std::vector<std::string> names;
  std::vector<double> truth;
  std::vector<StudyRow> rows;
};

// Simulate, sample and aggregate. Throws NumericalFailure when more than the allowed
// fraction of replications fails at some n.
StudyResult monte_carlo_study(const StudyConfig& cfg);

// Rows n, columns per parameter: mean and RMSE.
void write_study_table(std::ostream& os, const StudyResult& res);

}  // namespace hazode
