#include "hazode/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "hazode/errors.hpp"
#include "hazode/rng.hpp"

namespace hazode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double PriorComponent::log_density(double x) const {
  if (!std::isfinite(x)) return -kInf;
  if (kind == Kind::Gamma) {
    if (!(x > 0.0)) return -kInf;
    return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
  }
  const double z = (x - a) / b;
  return -0.5 * z * z - std::log(b) - 0.5 * std::log(2.0 * std::numbers::pi);
}

PriorSpec PriorSpec::defaults(FitFamily f) {
  PriorSpec p;
  for (const auto& info : family_parameters(f))
    p.components.push_back(info.positive ? PriorComponent{PriorComponent::Kind::Gamma, 2.0, 2.0}
                                         : PriorComponent{PriorComponent::Kind::Normal, 0.0, 1.0});
  return p;
}

double PriorSpec::log_density(std::span<const double> params) const {
  if (params.size() != components.size()) throw InvalidParameters("prior dimension mismatch");
  double l = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) l += components[i].log_density(params[i]);
  return l;
}

std::vector<double> PriorSpec::means() const {
  std::vector<double> m;
  for (const auto& c : components) m.push_back(c.mean());
  return m;
}

double log_posterior(FitFamily f, std::span<const double> params, const PreparedData& data, const PriorSpec& prior,
                     double dt) {
  const double lp = prior.log_density(params);
  if (!std::isfinite(lp)) return -kInf;
  const double ll = family_log_likelihood(f, params, data, dt);
  if (!std::isfinite(ll)) return -kInf;
  return ll + lp;
}

void ChainConfig::validate() const {
  if (iterations == 0 || burn_in >= iterations) throw InvalidParameters("chain: burn_in must be below iterations");
  if (thin == 0) throw InvalidParameters("chain: thin must be at least 1");
  if (!(initial_scale > 0.0)) throw InvalidParameters("chain: proposal scale must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw InvalidParameters("chain: target acceptance must lie in (0, 1)");
  if (adaptation_window == 0) throw InvalidParameters("chain: adaptation window must be positive");
}

std::vector<double> PosteriorChain::column(std::size_t j) const {
  std::vector<double> c(rows());
  for (std::size_t r = 0; r < c.size(); ++r) c[r] = at(r, j);
  return c;
}

PosteriorChain run_metropolis(const LogTarget& target, std::vector<double> z, const ChainConfig& cfg) {
  cfg.validate();
  const std::size_t dim = z.size();
  if (dim == 0) throw InvalidParameters("chain: empty parameter vector");
  double current = target(z);
  if (!std::isfinite(current)) throw InvalidParameters("chain: initial point has non-finite log-density");

  CounterRng proposals(cfg.seed, 0);
  CounterRng accepts(cfg.seed, 1);
  std::vector<double> log_scale(dim, std::log(cfg.initial_scale));
  std::vector<std::size_t> accepted(dim, 0);
  std::size_t window_accepts = 0;
  std::size_t silent_windows = 0;
  std::optional<std::size_t> first_silent;

  PosteriorChain chain;
  chain.dim = dim;
  chain.draws.reserve(cfg.retained() * dim);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const bool adapting = it < cfg.burn_in;
    const double gain = std::pow(static_cast<double>(it) + 1.0, -0.6);
    for (std::size_t j = 0; j < dim; ++j) {
      const double old = z[j];
      z[j] = old + std::exp(log_scale[j]) * proposals.normal();
      const double proposed = target(z);
      const double u = accepts.uniform();
      const bool ok = std::isfinite(proposed) && std::log(u) < proposed - current;
      if (ok) {
        current = proposed;
        ++window_accepts;
        if (!adapting) ++accepted[j];
      } else {
        z[j] = old;
      }
      if (adapting) log_scale[j] += gain * ((ok ? 1.0 : 0.0) - cfg.target_acceptance);
    }
    if ((it + 1) % cfg.adaptation_window == 0) {
      if (window_accepts == 0) {
        ++silent_windows;
        if (!first_silent) first_silent = it + 1 - cfg.adaptation_window;
      }
      window_accepts = 0;
    }
    if (!adapting && (it - cfg.burn_in + 1) % cfg.thin == 0) chain.draws.insert(chain.draws.end(), z.begin(), z.end());
  }

  const double post = static_cast<double>(cfg.iterations - cfg.burn_in);
  std::size_t total = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    chain.component_acceptance.push_back(static_cast<double>(accepted[j]) / post);
    chain.scales.push_back(std::exp(log_scale[j]));
    total += accepted[j];
  }
  chain.acceptance_rate = static_cast<double>(total) / (post * static_cast<double>(dim));
  if (silent_windows > 0)
    chain.diagnostics = std::to_string(silent_windows) + " adaptation window(s) without any accepted proposal, first at iteration " +
                        std::to_string(*first_silent);
  return chain;
}

PosteriorChain run_chain(FitFamily f, const PreparedData& data, const PriorSpec& prior, const ChainConfig& cfg) {
  cfg.validate();
  const auto& info = family_parameters(f);
  if (prior.components.size() != info.size()) throw InvalidParameters("prior dimension mismatch");

  std::vector<double> init;
  std::string source;
  if (cfg.init) {
    init = *cfg.init;
    source = "user";
  } else {
    const std::vector<double> start = cfg.mle_start ? *cfg.mle_start : prior.means();
    FitOptions fo;
    fo.seed = cfg.seed;
    fo.dt = cfg.dt;
    const FitResult fit = mle_fit(f, data, start, fo);
    if (fit.converged && std::isfinite(log_posterior(f, fit.params, data, prior, cfg.dt))) {
      init = fit.params;
      source = "mle";
    } else {
      init = prior.means();
      source = "prior-mean";
    }
  }
  if (init.size() != info.size()) throw InvalidParameters("chain: initial point has the wrong dimension");
  if (!std::isfinite(log_posterior(f, init, data, prior, cfg.dt)))
    throw InvalidParameters("chain: no initial point with finite log-posterior (" + source + ")");

  // Log-Jacobian of the exp map for every log-transformed coordinate.
  auto target = [&](std::span<const double> z) {
    const auto p = from_unconstrained(f, z);
    double jac = 0.0;
    for (std::size_t i = 0; i < info.size(); ++i)
      if (info[i].positive) jac += z[i];
    const double lp = log_posterior(f, p, data, prior, cfg.dt);
    return std::isfinite(lp) ? lp + jac : -kInf;
  };
  PosteriorChain chain = run_metropolis(target, to_unconstrained(f, init), cfg);
  for (std::size_t r = 0; r < chain.rows(); ++r)
    for (std::size_t j = 0; j < info.size(); ++j)
      if (info[j].positive) chain.draws[r * chain.dim + j] = std::exp(chain.draws[r * chain.dim + j]);
  for (std::size_t j = 0; j < info.size(); ++j) chain.names.push_back(info[j].name);
  chain.init = init;
  chain.init_source = source;
  return chain;
}

double batch_means_se(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  const auto b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t batches = n / b;
  std::vector<double> means(batches);
  double grand = 0.0;
  for (std::size_t k = 0; k < batches; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += x[k * b + i];
    means[k] = s / static_cast<double>(b);
    grand += means[k];
  }
  grand /= static_cast<double>(batches);
  double v = 0.0;
  for (double m : means) v += (m - grand) * (m - grand);
  v /= static_cast<double>(batches - 1);
  return std::sqrt(v / static_cast<double>(batches));
}

std::vector<ParamSummary> posterior_summary(const PosteriorChain& chain) {
  std::vector<ParamSummary> out;
  for (std::size_t j = 0; j < chain.dim; ++j) {
    std::vector<double> c = chain.column(j);
    const double n = static_cast<double>(c.size());
    double mean = 0.0;
    for (double x : c) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : c) ss += (x - mean) * (x - mean);
    const double sd = c.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double mcse = batch_means_se(c);
    std::sort(c.begin(), c.end());
    const std::string name = j < chain.names.size() ? chain.names[j] : "x" + std::to_string(j);
    out.push_back({name, mean, sd, quantile_sorted(c, 0.025), quantile_sorted(c, 0.5), quantile_sorted(c, 0.975), mcse});
  }
  return out;
}

PosteriorChain merge_chains(const PosteriorChain& a, const PosteriorChain& b) {
  if (a.dim != b.dim) throw InvalidParameters("merge_chains: dimension mismatch");
  PosteriorChain m = a;
  m.draws.insert(m.draws.end(), b.draws.begin(), b.draws.end());
  const double wa = static_cast<double>(a.rows()), wb = static_cast<double>(b.rows());
  const double w = wa + wb > 0.0 ? wa + wb : 1.0;
  m.acceptance_rate = (a.acceptance_rate * wa + b.acceptance_rate * wb) / w;
  for (std::size_t j = 0; j < m.component_acceptance.size() && j < b.component_acceptance.size(); ++j)
    m.component_acceptance[j] = (a.component_acceptance[j] * wa + b.component_acceptance[j] * wb) / w;
  return m;
}

StudyResult monte_carlo_study(const StudyConfig& cfg) {
  if (cfg.replications < 2) throw InvalidParameters("study: at least 2 replications required");
  if (!cfg.replication_seeds.empty() && cfg.replication_seeds.size() != cfg.replications)
    throw InvalidParameters("study: replication_seeds must have one entry per replication");
  cfg.chain.validate();
  const auto& info = family_parameters(cfg.family);
  const auto model = build_model(cfg.family, cfg.truth);
  if (!model) throw InvalidParameters("study: family " + std::string(to_string(cfg.family)) + " cannot be simulated");
  model->require_valid();

  CensoringSpec censor = CensoringSpec::none();
  double c_max = 0.0;
  if (cfg.censor_target && *cfg.censor_target > 0.0) {
    c_max = tune_cmax(*model, *cfg.censor_target, cfg.pilot_size, derive_seed(cfg.seed, 0xC3), cfg.inversion);
    censor = CensoringSpec::uniform(c_max);
  }

  StudyResult res{cfg.family, {}, cfg.truth, {}};
  for (const auto& pi : info) res.names.push_back(pi.name);

  struct Slot {
    std::uint64_t seed = 0;
    std::vector<double> means;
    std::string error;
  };
  const std::size_t reps = cfg.replications;
  std::vector<Slot> slots(cfg.n_grid.size() * reps);
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g)
    for (std::size_t r = 0; r < reps; ++r)
      slots[g * reps + r].seed =
          cfg.replication_seeds.empty() ? derive_seed(cfg.seed, cfg.n_grid[g], r) : cfg.replication_seeds[r];

  const PriorSpec prior = PriorSpec::defaults(cfg.family);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < slots.size(); k = next++) {
      Slot& slot = slots[k];
      const std::size_t n = cfg.n_grid[k / reps];
      try {
        const SurvivalDataset data = simulate_dataset(*model, n, censor, slot.seed, cfg.inversion);
        const PreparedData prepared = prepare(data);
        ChainConfig cc = cfg.chain;
        cc.seed = derive_seed(slot.seed, 7);
        if (!cc.init && !cc.mle_start) cc.mle_start = cfg.truth;
        const PosteriorChain chain = run_chain(cfg.family, prepared, prior, cc);
        for (const auto& s : posterior_summary(chain)) slot.means.push_back(s.mean);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, slots.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    StudyRow row{cfg.n_grid[g], c_max, 0, 0, {}, {}, {}, {}, {}, {}};
    const std::size_t k = info.size();
    std::vector<CompensatedSum> sum(k), sq(k);
    for (std::size_t r = 0; r < reps; ++r) {
      const Slot& slot = slots[g * reps + r];
      row.seeds.push_back(slot.seed);
      if (!slot.error.empty()) {
        ++row.failed;
        row.failures.push_back("seed " + std::to_string(slot.seed) + ": " + slot.error);
        continue;
      }
      ++row.completed;
      row.posterior_means.push_back(slot.means);
      for (std::size_t j = 0; j < k; ++j) {
        sum[j].add(slot.means[j]);
        const double e = slot.means[j] - cfg.truth[j];
        sq[j].add(e * e);
      }
    }
    if (static_cast<double>(row.failed) > cfg.max_failure_fraction * static_cast<double>(reps))
      throw NumericalFailure("study: " + std::to_string(row.failed) + " of " + std::to_string(reps) +
                             " replications failed at n = " + std::to_string(row.n) +
                             (row.failures.empty() ? "" : " (" + row.failures.front() + ")"));
    const double c = static_cast<double>(row.completed);
    for (std::size_t j = 0; j < k; ++j) {
      row.mean.push_back(sum[j].value() / c);
      row.bias.push_back(row.mean[j] - cfg.truth[j]);
      row.rmse.push_back(std::sqrt(sq[j].value() / c));
    }
    res.rows.push_back(std::move(row));
  }
  return res;
}

void write_study_table(std::ostream& os, const StudyResult& res) {
  os << "n";
  for (const auto& name : res.names) os << ',' << name << "_mean," << name << "_rmse";
  os << ",completed,failed\n";
  os << "truth";
  for (double t : res.truth) os << ',' << format_double(t) << ',';
  os << ",,\n";
  for (const auto& row : res.rows) {
    os << row.n;
    for (std::size_t j = 0; j < res.names.size(); ++j)
      os << ',' << format_double(row.mean[j]) << ',' << format_double(row.rmse[j]);
    os << ',' << row.completed << ',' << row.failed << '\n';
  }
}

}  // namespace hazode
