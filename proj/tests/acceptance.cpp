// Acceptance checks. One PASS/FAIL line per criterion; exit status is non-zero on FAIL.
//   hazode_acceptance <1..10>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "hazode/dataset.hpp"
#include "hazode/inference.hpp"
#include "hazode/mcmc.hpp"
#include "hazode/rng.hpp"
#include "hazode/sampling.hpp"
#include "support/stats.hpp"

using namespace hazode;

namespace {

constexpr std::uint64_t kSeed = 20240517;

const DampedOscParams kUnder{0.5, 1.0, 0.2, 0.1, 0.3};
const DampedOscParams kCrit{2.0, 1.0, 0.2, 0.1, 0.3};
const DampedOscParams kOver{3.0, 1.0, 0.2, 0.1, 0.3};
const SinusoidalParams kSin{0.2 * std::numbers::pi, 0.6, 0.1, 0.2};
const ExpInteractionParams kExpBoundary{0.1, 0.0, 0.1 / std::sqrt(0.1), -0.1};
const ExpInteractionParams kExp{0.1, 0.0, 0.4, 0.1};

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

// Max |h_rk4 - h_closed| and |H_trap - H_closed| over the grid nodes.
std::pair<double, double> closed_form_errors(const VectorField& f, State2 init, double horizon,
                                             const std::function<double(double)>& h,
                                             const std::function<double(double)>& H) {
  const auto traj = integrate(f, init, TimeGrid(0.0, horizon, kDefaultDt));
  double eh = 0.0, eH = 0.0;
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    const double t = traj.grid.time(i);
    eh = std::max(eh, std::abs(traj.h[i] - h(t)));
    eH = std::max(eH, std::abs(traj.H[i] - H(t)));
  }
  return {eh, eH};
}

Outcome closed_form_suite() {
  struct Case {
    std::string name;
    VectorField f;
    State2 init;
    double horizon;
    std::function<double(double)> h, H;
  };
  std::vector<Case> cases;
  for (const auto& [name, p] : {std::pair{"underdamped", kUnder}, std::pair{"critical", kCrit}, std::pair{"overdamped", kOver}})
    cases.push_back({name, damped_field(p), {p.h0, p.v0}, 30.0, [p](double t) { return damped_hazard_closed(t, p); },
                     [p](double t) { return damped_cumhaz_closed(t, p); }});
  const double r = 0.8, K = 1.0, h0 = 0.1;
  cases.push_back({"logistic", logistic_first_order_field(r, K), {h0, r * h0 * (1.0 - h0 / K)}, 40.0,
                   [=](double t) { return logistic_first_order_hazard(t, r, K, h0); },
                   [=](double t) { return logistic_first_order_cumhaz(t, r, K, h0); }});
  cases.push_back({"sinusoidal", sinusoidal_field(kSin), {kSin.h0, kSin.v0}, 50.0,
                   [](double t) { return sinusoidal_hazard(t, kSin); }, [](double t) { return sinusoidal_cumhaz(t, kSin); }});
  for (const auto& [name, p, T] : {std::tuple{"exp boundary", kExpBoundary, 60.0}, std::tuple{"exp", kExp, 10.0}})
    cases.push_back({name, exp_interaction_field(p), {p.h0, p.v0}, T, [p](double t) { return exp_beta0_hazard_closed(t, p); },
                     [p](double t) { return exp_beta0_cumhaz_closed(t, p); }});
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto [eh, eH] = closed_form_errors(c.f, c.init, c.horizon, c.h, c.H);
    ok = ok && eh <= 1e-6 && eH <= 1e-6;
    detail += fmt::format("{}[T={}] h {:.1e} H {:.1e}; ", c.name, c.horizon, eh, eH);
  }
  return {ok, detail};
}

Outcome asymptotics() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, p, min_cross, max_cross] :
       {std::tuple{"underdamped", kUnder, 2, 1 << 30}, std::tuple{"critical", kCrit, 0, 1}, std::tuple{"overdamped", kOver, 0, 1}}) {
    const auto traj = integrate(damped_field(p), {p.h0, p.v0}, TimeGrid(0.0, 50.0, kDefaultDt));
    const double gap = std::abs(traj.h.back() - 0.2);
    int crossings = 0;
    for (std::size_t i = 1; i < traj.grid.size(); ++i)
      if (traj.grid.time(i) > 1.0 && (traj.h[i - 1] - 0.2) * (traj.h[i] - 0.2) < 0.0) ++crossings;
    ok = ok && gap <= 1e-4 && crossings >= min_cross && crossings <= max_cross;
    detail += fmt::format("{} |h(50)-0.2| {:.1e}, crossings {}; ", name, gap, crossings);
  }
  return {ok, detail};
}

Outcome positivity() {
  std::mt19937_64 gen(kSeed);
  std::uniform_real_distribution<double> w(0.1, 3.0), c(0.0, 1.5), h(0.01, 1.0), v(-1.0, 1.0), a(0.01, 1.0);
  int sin_checked = 0, sin_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const SinusoidalParams p{w(gen), c(gen), h(gen), v(gen)};
    const double margin = p.c - (p.h0 / 2.0 + p.v0 * p.v0 / (2.0 * p.h0 * p.omega * p.omega));
    if (std::abs(margin) <= 1e-9) continue;
    const double period = 2.0 * std::numbers::pi / p.omega;
    const int steps = 200000;
    double m = sinusoidal_hazard(0.0, p);
    for (int i = 1; i <= steps; ++i) m = std::min(m, sinusoidal_hazard(10.0 * period * i / steps, p));
    ++sin_checked;
    if (sinusoidal_positivity(p) != (m > 0.0)) ++sin_bad;
  }
  int exp_checked = 0, exp_bad = 0, exact_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const ExpInteractionParams p{a(gen), 0.0, h(gen), v(gen)};
    const double s = std::sqrt(p.alpha);
    if (std::abs(p.h0 - std::abs(p.v0) / s) <= 1e-9) continue;
    const int steps = 20000;
    double m = p.h0;
    for (int i = 1; i <= steps; ++i) m = std::min(m, exp_beta0_hazard_closed(10.0 / s * i / steps, p));
    ++exp_checked;
    if (exp_beta0_positivity(p) != (m > 0.0)) ++exp_bad;
    if ((p.h0 + p.v0 / s > 0.0) != (m > 0.0)) ++exact_bad;
  }
  return {sin_bad == 0 && exp_bad == 0,
          fmt::format("sinusoidal disagreements {}/{}; exp h0>=|v0|/sqrt(a) disagreements {}/{} "
                      "(growing-mode condition h0+v0/sqrt(a)>0 disagreements {})",
                      sin_bad, sin_checked, exp_bad, exp_checked, exact_bad)};
}

Outcome improper_boundary() {
  const ModelSpec m(kExpBoundary);
  const auto traj = integrate(m.vector_field(), m.initial_state(), TimeGrid(0.0, 60.0, kDefaultDt));
  const double S60 = std::exp(-traj.H.back());
  const double gap = std::abs(S60 - std::exp(-1.0));
  bool inf_ok = true;
  for (double u : {0.6322, 0.64, 0.7, 0.9, 0.999}) inf_ok = inf_ok && std::isinf(simulate_event_time(m, u));
  const bool finite_ok = std::isfinite(simulate_event_time(m, 0.6));
  return {gap <= 1e-4 && inf_ok && finite_ok,
          fmt::format("|S(60)-e^-1| {:.2e}; +inf beyond H=1 {}; finite below {}", gap, inf_ok, finite_ok)};
}

Outcome sampler_ks() {
  bool ok = true;
  std::string detail;
  std::uint64_t stream = 0;
  for (const ModelSpec& m : {ModelSpec(kUnder), ModelSpec(kSin), ModelSpec(kExp)}) {
    const auto d = simulate_dataset(m, 20000, CensoringSpec::none(), derive_seed(kSeed, ++stream));
    const double D = testing::ks_statistic(d.times, [&](double t) { return -std::expm1(-m.cumhaz(t)); });
    const double p = testing::ks_pvalue(D, d.size());
    ok = ok && p > 0.01;
    detail += fmt::format("{} D {:.4f} p {:.3f}; ", m.name(), D, p);
  }
  return {ok, detail};
}

Outcome mgf_checks() {
  const double c = mgf(ModelSpec(SinusoidalParams{1.0, 0.6, 0.6, 0.0}), 0.3, kDefaultDt).value;
  bool ok = std::abs(c - 2.0) <= 1e-6;
  std::string detail = fmt::format("constant |M(0.3)-2| {:.1e}; ", std::abs(c - 2.0));
  for (const ModelSpec& m : {ModelSpec(kUnder), ModelSpec(PopDynParams::from_zeta(0.8, 1.0, 0.5, 0.1, 0.2)), ModelSpec(kSin),
                             ModelSpec(kExpBoundary)}) {
    const double b = mgf_domain_bound(m);
    bool flags = true;
    for (double s : {b, b + 1e-6, 1.1 * b + 0.01, 2.0 * b + 1.0}) flags = flags && mgf(m, s).divergent;
    flags = flags && (b == 0.0 || !mgf(m, 0.5 * b).divergent);
    ok = ok && flags;
    detail += fmt::format("{} bound {} flags {}; ", m.name(), b, flags);
  }
  const ModelSpec under(kUnder);
  const double exact = mgf(under, 0.1, kDefaultDt).value;
  const auto d = simulate_dataset(under, 200000, CensoringSpec::none(), kSeed);
  double s = 0.0, s2 = 0.0;
  for (double t : d.times) {
    const double x = std::exp(0.1 * t);
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(d.size());
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  const double z = std::abs(exact - mean) / se;
  ok = ok && z <= 3.0;
  detail += fmt::format("underdamped M(0.1) {:.6f} vs MC {:.6f} ({:.2f} SE)", exact, mean, z);
  return {ok, detail};
}

Outcome conjugate() {
  const ModelSpec m(SinusoidalParams{1.0, 0.6, 0.6, 0.0});
  const auto prior = PriorSpec::defaults(FitFamily::Constant);
  int pass = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = prepare(simulate_dataset(m, 500, CensoringSpec::uniform(5.0), derive_seed(kSeed, seed)));
    ChainConfig cfg;
    cfg.seed = seed;
    const auto s = posterior_summary(run_chain(FitFamily::Constant, data, prior, cfg)).front();
    const double target = (2.0 + data.events) / (2.0 + data.total_time);
    const double z = std::abs(s.mean - target) / s.mcse;
    if (z <= 3.0) ++pass;
    detail += fmt::format("{:.2f} ", z);
  }
  return {pass == 10, fmt::format("{}/10 seeds within 3 MCSE; |z| = {}", pass, detail)};
}

Outcome desk_study() {
  StudyConfig cfg;
  cfg.family = FitFamily::Damped;
  cfg.truth = {0.5, 1.0, 0.2, 0.1, 0.3};
  cfg.n_grid = {500, 2000, 5000};
  cfg.replications = 50;
  cfg.seed = kSeed;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto res = monte_carlo_study(cfg);
  const double reference_rmse[] = {0.1540, 0.0930, 0.0372, 0.0166, 0.0456};
  const auto& r500 = res.rows[0];
  const auto& r2000 = res.rows[1];
  const auto& r5000 = res.rows[2];
  bool within = true;
  int improved = 0;
  std::string detail = "n=2000 RMSE";
  for (std::size_t j = 0; j < 5; ++j) {
    const double ratio = r2000.rmse[j] / reference_rmse[j];
    within = within && ratio <= 3.0 && ratio >= 1.0 / 3.0;
    if (r5000.rmse[j] < r500.rmse[j]) ++improved;
    detail += fmt::format(" {}={:.4f}(x{:.2f})", res.names[j], r2000.rmse[j], ratio);
  }
  detail += fmt::format("; RMSE(5000)<RMSE(500) for {}/5; c_max {:.3f}; failed {}/{}/{}", improved, r2000.c_max, r500.failed,
                        r2000.failed, r5000.failed);
  return {within && improved >= 4, detail};
}

Outcome real_data_bic() {
  const auto raw = ingest_survival_data(HAZODE_DATA_DIR "/lung.csv", StatusConvention::Status12, TimeUnit::DaysToYears);
  const auto data = prepare(raw);
  const auto w = fit_weibull(data);
  const auto ln = fit_lognormal(data);
  const auto sn = mle_fit(FitFamily::Sinusoidal, data, sinusoidal_start(init_from_survival(raw)));
  const bool order = w.converged && ln.converged && sn.converged && w.bic < sn.bic && sn.bic < ln.bic;
  const double dw = std::abs(w.bic - 371.38), ds = std::abs(sn.bic - 384.01), dl = std::abs(ln.bic - 402.21);
  const bool exact = dw <= 1.0 && ds <= 1.0 && dl <= 1.0;
  std::string detail = fmt::format("BIC weibull {:.2f} sinusoidal {:.2f} lognormal {:.2f}; ordering {}; exact within 1.0: {}",
                                   w.bic, sn.bic, ln.bic, order ? "ok" : "violated", exact ? "yes" : "no");
  if (!exact)
    detail += fmt::format(" (|d| = {:.2f} / {:.2f} / {:.2f}; unit assumption: days / 365.25 to years, the source's time "
                          "unit is not stated)",
                          dw, ds, dl);
  return {order && exact, detail};
}

Outcome initialization() {
  const auto d = simulate_dataset(ModelSpec(SinusoidalParams{1.0, 0.6, 0.6, 0.0}), 2000, CensoringSpec::none(), kSeed);
  const auto est = init_from_survival(d);
  const double rel = std::abs(est.h0 - 0.6) / 0.6;
  return {rel <= 0.10 && est.v0 >= 0.0 && est.v0 <= 0.05,
          fmt::format("h0 {:.4f} (rel err {:.3f}); v0 {:.4f}; lambda_hat {:.4f}", est.h0, rel, est.v0, est.lambda_hat)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"closed-form agreement", 10, closed_form_suite},
      {"damped asymptotics", 5, asymptotics},
      {"positivity conditions", 30, positivity},
      {"improper-survival boundary", 5, improper_boundary},
      {"sampler distribution recovery", 60, sampler_ks},
      {"mgf", 60, mgf_checks},
      {"conjugate mcmc", 120, conjugate},
      {"desk-scale study", 7200, desk_study},
      {"real-data bic", 60, real_data_bic},
      {"initialization", 5, initialization},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::stoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(criteria().size()); ++i) which.push_back(i);
  int failed = 0;
  for (int id : which) {
    if (id < 1 || id > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& c = criteria()[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome out{false, ""};
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    fmt::print("criterion {} ({}): {} [{:.1f}s of {:.0f}s{}] {}\n", id, c.title, pass ? "PASS" : "FAIL", secs, c.budget_s,
               in_time ? "" : ", over budget", out.detail);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
