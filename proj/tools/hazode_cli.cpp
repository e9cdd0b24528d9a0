// hazode: curves, simulate, fit, mgf, study and ingest-check over flat key=value configs.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

#include "hazode/errors.hpp"
#include "hazode/inference.hpp"
#include "hazode/mcmc.hpp"
#include "hazode/rng.hpp"
#include "hazode/sampling.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace hazode;
using hazode::cli::ConfigError;
using hazode::cli::RunConfig;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kData = 4 };

FitFamily family_of(const RunConfig& cfg) {
  const std::string name = cfg.str("family");
  const auto f = parse_family(name);
  if (!f) throw ConfigError("unknown family '" + name + "'");
  return *f;
}

std::vector<double> params_of(const RunConfig& cfg, FitFamily f, const std::string& prefix = "") {
  std::vector<double> p;
  for (const auto& info : family_parameters(f)) p.push_back(cfg.num(prefix + info.name));
  return p;
}

ModelSpec model_of(const RunConfig& cfg) {
  const FitFamily f = family_of(cfg);
  const auto m = build_model(f, params_of(cfg, f));
  if (!m) throw ConfigError("family '" + std::string(to_string(f)) + "' has no ODE model");
  m->require_valid();
  return *m;
}

StatusConvention convention_of(const RunConfig& cfg) {
  const std::string c = cfg.str("convention", "status01");
  if (c == "status01") return StatusConvention::Status01;
  if (c == "status12") return StatusConvention::Status12;
  throw ConfigError("convention must be status01 or status12, got '" + c + "'");
}

TimeUnit time_unit_of(const RunConfig& cfg) {
  const std::string u = cfg.str("time_unit", "native");
  if (u == "native") return TimeUnit::Native;
  if (u == "days_to_years") return TimeUnit::DaysToYears;
  throw ConfigError("time_unit must be native or days_to_years, got '" + u + "'");
}

// "-" or empty writes to stdout.
template <class F>
void emit(const std::string& out, F&& body) {
  if (out.empty() || out == "-") {
    body(std::cout);
    return;
  }
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot write " + out);
  body(os);
}

void write_curve(const fs::path& path, const TimeGrid& grid, std::span<const double> h, std::span<const double> H,
                 std::size_t stride) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "t,h,S,H\n";
  for (std::size_t i = 0; i < grid.size(); i += stride)
    os << format_double(grid.time(i)) << ',' << format_double(h[i]) << ',' << format_double(std::exp(-H[i])) << ','
       << format_double(H[i]) << '\n';
}

void write_model_curve(const fs::path& path, const ModelSpec& m, double horizon, double dt, std::size_t stride) {
  m.require_valid();
  const auto traj = integrate(m.vector_field(), m.initial_state(), TimeGrid(0.0, horizon, dt));
  if (traj.first_negative)
    throw InvalidParameters(m.name() + ": hazard turns negative at t = " + format_double(*traj.first_negative));
  write_curve(path, traj.grid, traj.h, traj.H, stride);
}

int cmd_curves(const RunConfig& cfg) {
  const double dt = cfg.num("dt", kDefaultDt);
  const auto stride = static_cast<std::size_t>(cfg.u64("stride", 10));
  if (stride == 0) throw ConfigError("stride must be positive");
  const fs::path dir = cfg.str("out", "curves");
  fs::create_directories(dir);

  if (cfg.has("family")) {
    write_model_curve(dir / cfg.str("name", "curve.csv"), model_of(cfg), cfg.num("horizon", 50.0), dt, stride);
    return kOk;
  }
  for (const auto& set : cfg.list("sets", "damped,logistic,sinusoidal,exp_boundary,exp")) {
    if (set == "damped") {
      const double T = cfg.num("horizon.damped", 30.0);
      write_model_curve(dir / "damped_underdamped.csv", ModelSpec(DampedOscParams{0.5, 1.0, 0.2, 0.1, 0.3}), T, dt, stride);
      write_model_curve(dir / "damped_critical.csv", ModelSpec(DampedOscParams{2.0, 1.0, 0.2, 0.1, 0.3}), T, dt, stride);
      write_model_curve(dir / "damped_overdamped.csv", ModelSpec(DampedOscParams{3.0, 1.0, 0.2, 0.1, 0.3}), T, dt, stride);
    } else if (set == "logistic") {
      const double r = 0.8, K = 1.0, tau = 1.2, zeta = 0.5, h0 = 0.1, v0 = 0.2;
      const TimeGrid grid(0.0, cfg.num("horizon.logistic", 40.0), dt);
      std::vector<double> h(grid.size()), H(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        h[i] = logistic_first_order_hazard(grid.time(i), r, K, h0);
        H[i] = logistic_first_order_cumhaz(grid.time(i), r, K, h0);
      }
      write_curve(dir / "logistic_first_order.csv", grid, h, H, stride);
      const auto delayed = delayed_logistic_solve(r, K, tau, h0, grid);
      write_curve(dir / "logistic_delayed.csv", grid, delayed.h, delayed.H, stride);
      write_model_curve(dir / "logistic_second_order.csv", ModelSpec(PopDynParams::from_zeta(r, K, zeta, h0, v0)), grid.t_end(),
                        dt, stride);
    } else if (set == "sinusoidal") {
      write_model_curve(dir / "sinusoidal.csv", ModelSpec(SinusoidalParams{0.2 * std::numbers::pi, 0.6, 0.1, 0.2}),
                        cfg.num("horizon.sinusoidal", 50.0), dt, stride);
    } else if (set == "exp_boundary") {
      write_model_curve(dir / "exp_boundary.csv", ModelSpec(ExpInteractionParams{0.1, 0.0, 0.1 / std::sqrt(0.1), -0.1}),
                        cfg.num("horizon.exp_boundary", 60.0), dt, stride);
    } else if (set == "exp") {
      const double T = cfg.num("horizon.exp", 10.0);
      write_model_curve(dir / "exp.csv", ModelSpec(ExpInteractionParams{0.1, 0.0, 0.4, 0.1}), T, dt, stride);
      write_model_curve(dir / "exp_interaction.csv", ModelSpec(ExpInteractionParams{0.1, 0.1, 0.4, 0.1}), T, dt, stride);
    } else {
      throw ConfigError("unknown curve set '" + set + "'");
    }
  }
  return kOk;
}

InversionConfig inversion_of(const RunConfig& cfg) {
  InversionConfig inv;
  inv.dt = cfg.num("dt", kDefaultDt);
  inv.max_horizon = cfg.num("max_horizon", inv.max_horizon);
  inv.validate();
  return inv;
}

int cmd_simulate(const RunConfig& cfg) {
  const ModelSpec m = model_of(cfg);
  const auto n = static_cast<std::size_t>(cfg.u64("n", 0));
  if (n == 0) throw ConfigError("n must be a positive integer");
  const std::uint64_t seed = cfg.u64("seed", 1);
  const InversionConfig inv = inversion_of(cfg);

  CensoringSpec censor = CensoringSpec::none();
  if (cfg.has("censor_target") && cfg.has("c_max")) throw ConfigError("give either censor_target or c_max, not both");
  if (cfg.has("censor_target")) {
    const double target = cfg.num("censor_target");
    censor = CensoringSpec::uniform(tune_cmax(m, target, cfg.u64("pilot_size", 10000), derive_seed(seed, 0xC3), inv));
  } else if (cfg.has("c_max")) {
    censor = CensoringSpec::uniform(cfg.num("c_max"));
  }
  if (cfg.has("horizon")) censor.horizon = cfg.num("horizon");

  const auto data = simulate_dataset(m, n, censor, seed, inv);
  const std::string out = cfg.str("out", "data.csv");
  emit(out, [&](std::ostream& os) { write_dataset_csv(os, data); });
  if (out != "-") {
    std::ofstream meta(out + ".meta");
    meta << "model=" << m.name() << "\nfamily=" << cfg.str("family") << '\n';
    const FitFamily f = family_of(cfg);
    const auto p = params_of(cfg, f);
    for (std::size_t i = 0; i < p.size(); ++i) meta << "param." << family_parameters(f)[i].name << '=' << format_double(p[i]) << '\n';
    meta << "n=" << n << "\nseed=" << seed << "\ndt=" << format_double(inv.dt) << '\n';
    if (censor.kind == CensoringSpec::Kind::Uniform) meta << "c_max=" << format_double(censor.c_max) << '\n';
    if (censor.horizon) meta << "horizon=" << format_double(*censor.horizon) << '\n';
    meta << "events=" << data.event_count() << "\ncensoring_rate=" << format_double(data.censoring_rate()) << '\n';
  }
  return kOk;
}

// Starting values derived from the data for every ODE family.
std::vector<double> auto_start(FitFamily f, const InitEstimate& est) {
  double h0 = est.h0, v0 = est.v0;
  if (!(h0 > 0.0)) {
    h0 = est.c0;
    v0 = 0.0;
  }
  const double c0 = est.c0 > 0.0 ? est.c0 : h0;
  const double alpha = std::max(0.1, 1.21 * (v0 / h0) * (v0 / h0));
  switch (f) {
    case FitFamily::Constant: return {c0};
    case FitFamily::Damped: return {1.0, 1.0, c0, h0, v0};
    case FitFamily::CriticallyDamped: return {2.0, c0, h0, v0};
    case FitFamily::PopDyn: return {1.0, 0.5, c0, h0, v0};
    case FitFamily::Sinusoidal: {
      InitEstimate e = est;
      e.h0 = h0;
      e.v0 = v0;
      e.c0 = c0;
      return sinusoidal_start(e);
    }
    case FitFamily::ExpBeta0: return {alpha, h0, v0};
    case FitFamily::ExpInteraction: return {alpha, 0.01, h0, v0};
    default: return {};
  }
}

int cmd_fit(const RunConfig& cfg, const std::string& init_mode) {
  std::vector<FitFamily> families;
  for (const auto& name : cfg.list("families", "weibull,lognormal,sinusoidal")) {
    const auto f = parse_family(name);
    if (!f) throw ConfigError("unknown family '" + name + "'");
    families.push_back(*f);
  }
  const auto raw = ingest_survival_data(cfg.str("data"), convention_of(cfg), time_unit_of(cfg));
  const auto data = prepare(raw);
  FitOptions opt;
  opt.dt = cfg.num("dt", kDefaultDt);
  opt.seed = cfg.u64("seed", opt.seed);
  opt.starts = static_cast<std::size_t>(cfg.u64("starts", opt.starts));
  std::optional<RunConfig> init_file;
  if (init_mode == "file") init_file = RunConfig::from_file(cfg.str("init_file"));
  else if (init_mode != "auto") throw ConfigError("--init must be auto or file");
  const InitEstimate est = init_from_survival(raw, cfg.num("init_window", 1.0 / 12.0));

  std::vector<FitResult> fits;
  for (const FitFamily f : families) {
    if (f == FitFamily::Weibull) fits.push_back(fit_weibull(data, opt));
    else if (f == FitFamily::LogNormal) fits.push_back(fit_lognormal(data, opt));
    else {
      const auto start = init_file ? params_of(*init_file, f, std::string(to_string(f)) + ".") : auto_start(f, est);
      fits.push_back(mle_fit(f, data, start, opt));
    }
  }
  if (init_file && !init_file->unused().empty()) throw ConfigError("init file: unused key '" + init_file->unused().front() + "'");
  emit(cfg.str("out", "-"), [&](std::ostream& os) {
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (i) os << '\n';
      write_fit_report(os, fits[i]);
    }
  });
  const bool all = std::all_of(fits.begin(), fits.end(), [](const FitResult& r) { return r.converged; });
  if (!all) std::cerr << "hazode: at least one fit did not converge\n";
  return all ? kOk : kNumerical;
}

int cmd_mgf(const RunConfig& cfg) {
  const ModelSpec m = model_of(cfg);
  std::vector<double> grid;
  if (cfg.has("s")) {
    grid = cfg.nums("s");
  } else {
    const double lo = cfg.num("s_min"), hi = cfg.num("s_max");
    const auto count = static_cast<std::size_t>(cfg.u64("s_count", 11));
    if (count < 2 || !(hi > lo)) throw ConfigError("mgf sweep needs s_max > s_min and s_count >= 2");
    for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  const double dt = cfg.num("dt", 1e-2), tol = cfg.num("tail_tol", 1e-8), max_h = cfg.num("max_horizon", 6400.0);
  std::vector<MgfResult> rows;
  for (double s : grid) rows.push_back(mgf(m, s, dt, tol, max_h));
  emit(cfg.str("out", "-"), [&](std::ostream& os) { write_mgf_sweep(os, rows); });
  return kOk;
}

int cmd_study(const RunConfig& cfg) {
  StudyConfig sc;
  sc.family = family_of(cfg);
  sc.truth = params_of(cfg, sc.family);
  sc.n_grid.clear();
  for (double n : cfg.nums(cfg.has("n_grid") ? "n_grid" : "n")) {
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("sample sizes must be positive integers");
    sc.n_grid.push_back(static_cast<std::size_t>(n));
  }
  sc.replications = static_cast<std::size_t>(cfg.u64("replications", sc.replications));
  const std::string censor = cfg.str("censor_target", "0.25");
  if (censor == "none") sc.censor_target.reset();
  else sc.censor_target = cfg.num("censor_target", 0.25);
  sc.pilot_size = static_cast<std::size_t>(cfg.u64("pilot_size", sc.pilot_size));
  sc.seed = cfg.u64("seed", sc.seed);
  sc.jobs = static_cast<std::size_t>(cfg.u64("jobs", std::max(1u, std::thread::hardware_concurrency())));
  sc.chain.iterations = static_cast<std::size_t>(cfg.u64("iterations", sc.chain.iterations));
  sc.chain.burn_in = static_cast<std::size_t>(cfg.u64("burn_in", sc.chain.burn_in));
  sc.chain.thin = static_cast<std::size_t>(cfg.u64("thin", sc.chain.thin));
  sc.chain.dt = cfg.num("dt", kDefaultDt);
  sc.inversion = inversion_of(cfg);
  const auto res = monte_carlo_study(sc);
  emit(cfg.str("out", "-"), [&](std::ostream& os) { write_study_table(os, res); });
  for (const auto& row : res.rows)
    for (const auto& f : row.failures) std::cerr << "hazode: n=" << row.n << " " << f << '\n';
  return kOk;
}

int cmd_ingest_check(const RunConfig& cfg) {
  const auto d = ingest_survival_data(cfg.str("data"), convention_of(cfg), time_unit_of(cfg));
  std::cout << "rows=" << d.size() << "\nevents=" << d.event_count() << "\ncensoring_rate=" << format_double(d.censoring_rate())
            << "\ndropped_rows=" << d.meta.dropped_rows << "\ntime_unit=" << d.meta.time_unit
            << "\nmax_time=" << format_double(d.max_time()) << '\n';
  if (cfg.has("out")) emit(cfg.str("out"), [&](std::ostream& os) { write_dataset_csv(os, d); });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival models with second-order hazard dynamics"};
  app.require_subcommand(1);

  std::string config_path, init_mode = "auto";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<double> dt;
  std::optional<std::string> out, data;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"curves", "Hazard, survival and cumulative hazard grids for the reference parameter sets"},
      {"simulate", "Simulate a right-censored dataset by cumulative-hazard inversion"},
      {"fit", "Maximum-likelihood fits and BIC for one or more families"},
      {"study", "Replicated simulate-and-sample study"},
      {"mgf", "Moment generating function sweep"},
      {"ingest-check", "Parse a survival dataset and report its summary"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override a config key (key=value)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out, "output file or directory");
    sub->add_option("--jobs", jobs, "worker threads");
    sub->add_option("--dt", dt, "integration step");
    if (name == "fit") sub->add_option("--init", init_mode, "starting values")->check(CLI::IsMember({"auto", "file"}));
    if (name == "fit" || name == "ingest-check") sub->add_option("data", data, "dataset path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    for (const auto& s : sets) cfg.set(s);
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (jobs) cfg.set("jobs", std::to_string(*jobs));
    if (dt) cfg.set("dt", format_double(*dt));
    if (out) cfg.set("out", *out);
    if (data) cfg.set("data", *data);

    int code = kOk;
    if (command == "curves") code = cmd_curves(cfg);
    else if (command == "simulate") code = cmd_simulate(cfg);
    else if (command == "fit") code = cmd_fit(cfg, init_mode);
    else if (command == "study") code = cmd_study(cfg);
    else if (command == "mgf") code = cmd_mgf(cfg);
    else code = cmd_ingest_check(cfg);
    // Common flags are accepted by every command even where they have no effect.
    cfg.u64("seed", 0);
    cfg.u64("jobs", 1);
    cfg.num("dt", kDefaultDt);
    if (const auto unused = cfg.unused(); !unused.empty()) {
      std::cerr << "hazode: unrecognised config key '" << unused.front() << "' for " << command << '\n';
      return kConfig;
    }
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "hazode: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidParameters& e) {
    std::cerr << "hazode: invalid parameters: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "hazode: data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalFailure& e) {
    std::cerr << "hazode: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IntegrationBlowup& e) {
    std::cerr << "hazode: integration blew up at t = " << e.time() << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const HorizonExhausted& e) {
    std::cerr << "hazode: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "hazode: " << e.what() << '\n';
    return kNumerical;
  }
}
