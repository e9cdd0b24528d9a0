#pragma once

// Data-parallel censored log-likelihood sums
//
//     sum_i delta_i log h(t_i) - sum_i H(t_i)
//
// for hazard families with closed forms. Every kernel exists as a scalar reference
// and as an AVX2+FMA variant (transcendentals from glibc's libmvec); the variant is
// picked once at startup from CPUID and can be forced with HAZODE_ISA=scalar|avx2.
// A kernel returns -inf when an event time has h <= 0.

#include <span>
#include <string_view>

#include "hazode/models.hpp"

namespace hazode::simd {

// Structure-of-arrays view of prepared observations.
struct Observations {
  std::span<const double> t;
  std::span<const double> delta;  // 0.0 or 1.0
  std::span<const double> log_t;  // log(t), -inf at t = 0
};

struct WeibullCoeffs {
  double beta;
  double kappa;
};

struct KernelTable {
  double (*damped)(const Observations&, const DampedSolution&);
  double (*sinusoidal)(const Observations&, const SinusoidalParams&);
  double (*exp_beta0)(const Observations&, const ExpInteractionParams&);
  double (*weibull)(const Observations&, const WeibullCoeffs&);
};

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);

// Kernels for a specific instruction set. Throws std::runtime_error if unsupported.
const KernelTable& kernels(Isa isa);

// Kernels chosen by the dispatcher.
const KernelTable& active_kernels();
Isa active_isa();
// Overrides the dispatcher (tests, benchmarking). Throws if unsupported.
void set_active_isa(Isa isa);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace hazode::simd
