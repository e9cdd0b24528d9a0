#include "hazode/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hazode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  // Standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  Vertex best{x0, eval(x0)};
  bool converged = false;
  for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x = best.x;
      x[i] += x[i] != 0.0 ? opt.initial_step * std::max(std::abs(x[i]), 1e-3) : opt.initial_step;
      simplex.push_back({x, eval(x)});
    }

    converged = false;
    std::vector<double> centroid(n), trial(n);
    auto blend = [&](const std::vector<double>& from, double coef, std::vector<double>& out) {
      // out = centroid + coef * (from - centroid)
      for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (from[j] - centroid[j]);
    };

    while (evals < opt.max_evals) {
      std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      double spread_x = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          spread_x = std::max(spread_x, std::abs(simplex[i].x[j] - simplex[0].x[j]));
      const double spread_f = std::isfinite(simplex[n].f) ? simplex[n].f - simplex[0].f : kInf;
      if (spread_x <= opt.x_tolerance && spread_f <= opt.f_tolerance * (1.0 + std::abs(simplex[0].f))) {
        converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
      for (double& c : centroid) c /= static_cast<double>(n);

      Vertex& worst = simplex[n];
      blend(worst.x, -kReflect, trial);
      const double fr = eval(trial);
      if (fr < simplex[0].f) {
        std::vector<double> expanded(n);
        blend(worst.x, -kExpand, expanded);
        const double fe = eval(expanded);
        if (fe < fr) worst = {std::move(expanded), fe};
        else worst = {trial, fr};
      } else if (fr < simplex[n - 1].f) {
        worst = {trial, fr};
      } else {
        const bool outside = fr < worst.f;
        std::vector<double> contracted(n);
        if (outside) blend(trial, kContract, contracted);
        else blend(worst.x, kContract, contracted);
        const double fc = eval(contracted);
        if (fc < std::min(fr, worst.f)) {
          worst = {std::move(contracted), fc};
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
              simplex[i].x[j] = simplex[0].x[j] + kShrink * (simplex[i].x[j] - simplex[0].x[j]);
            simplex[i].f = eval(simplex[i].x);
          }
        }
      }
    }

    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double gain = best.f - simplex[0].f;
    const bool improved = simplex[0].f < best.f;
    if (improved) best = simplex[0];
    if (!improved || gain <= opt.f_tolerance * (1.0 + std::abs(best.f)) || evals >= opt.max_evals) break;
  }
  return {best.x, best.f, evals, converged};
}

}  // namespace hazode
