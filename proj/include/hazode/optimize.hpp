#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hazode {

struct NelderMeadOptions {
  double initial_step = 0.1;
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-10;
  std::size_t max_evals = 20000;
  // Rebuild the simplex around the best vertex after convergence until no further gain.
  std::size_t max_restarts = 3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value;
  std::size_t evals;
  bool converged;
};

// Minimises f; non-finite values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                             const NelderMeadOptions& opt = {});

}  // namespace hazode
