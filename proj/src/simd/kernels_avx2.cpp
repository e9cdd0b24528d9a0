// Compiled with -mavx2 -mfma; only reached after the dispatcher has checked CPUID.

#include <immintrin.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>

#include "hazode/simd/kernels.hpp"

// glibc libmvec, 4-lane AVX2 variants (vector function ABI names).
extern "C" {
__m256d _ZGVdN4v_exp(__m256d);
__m256d _ZGVdN4v_expm1(__m256d);
__m256d _ZGVdN4v_log(__m256d);
__m256d _ZGVdN4v_sin(__m256d);
__m256d _ZGVdN4v_cos(__m256d);
}

namespace hazode::simd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline __m256d vexp(__m256d x) { return _ZGVdN4v_exp(x); }
inline __m256d vexpm1(__m256d x) { return _ZGVdN4v_expm1(x); }
inline __m256d vlog(__m256d x) { return _ZGVdN4v_log(x); }
inline __m256d vsin(__m256d x) { return _ZGVdN4v_sin(x); }
inline __m256d vcos(__m256d x) { return _ZGVdN4v_cos(x); }
inline __m256d splat(double x) { return _mm256_set1_pd(x); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lanes past the end are padded with t = 0, delta = 0 and masked out of both sums.
template <class Eval>
double accumulate(const Observations& obs, Eval&& eval) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d half = splat(0.5);
  const __m256d all = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  __m256d events = zero;
  __m256d cumulative = zero;
  __m256d bad = zero;

  auto lane_step = [&](__m256d t, __m256d delta, __m256d lt, __m256d live) {
    __m256d h, H;
    eval(t, lt, h, H);
    const __m256d is_event = _mm256_and_pd(_mm256_cmp_pd(delta, half, _CMP_GT_OQ), live);
    const __m256d positive = _mm256_cmp_pd(h, zero, _CMP_GT_OQ);
    bad = _mm256_or_pd(bad, _mm256_andnot_pd(positive, is_event));
    events = _mm256_add_pd(events, _mm256_and_pd(is_event, vlog(h)));
    cumulative = _mm256_add_pd(cumulative, _mm256_and_pd(live, H));
  };

  const std::size_t n = obs.t.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lane_step(_mm256_loadu_pd(&obs.t[i]), _mm256_loadu_pd(&obs.delta[i]), _mm256_loadu_pd(&obs.log_t[i]), all);
  }
  if (i < n) {
    alignas(32) std::array<double, 4> t{}, d{}, lt{}, live{};
    for (std::size_t j = 0; i + j < n; ++j) {
      t[j] = obs.t[i + j];
      d[j] = obs.delta[i + j];
      lt[j] = obs.log_t[i + j];
      live[j] = std::bit_cast<double>(~std::uint64_t{0});
    }
    lane_step(_mm256_load_pd(t.data()), _mm256_load_pd(d.data()), _mm256_load_pd(lt.data()),
              _mm256_load_pd(live.data()));
  }
  if (_mm256_movemask_pd(bad) != 0) return kNegInf;
  return hsum(events) - hsum(cumulative);
}

double damped(const Observations& obs, const DampedSolution& s) {
  const __m256d hstar = splat(s.hstar);
  const __m256d A = splat(s.A);
  const __m256d B = splat(s.B);
  switch (s.regime) {
    case DampingRegime::Underdamped: {
      const double beta = s.decay * s.decay + s.omega * s.omega;
      const __m256d neg_decay = splat(-s.decay);
      const __m256d decay = splat(s.decay);
      const __m256d omega = splat(s.omega);
      const __m256d a_over_b = splat(s.A / beta);
      const __m256d b_over_b = splat(s.B / beta);
      return accumulate(obs, [&](__m256d t, __m256d, __m256d& h, __m256d& H) {
        const __m256d e = vexp(_mm256_mul_pd(neg_decay, t));
        const __m256d wt = _mm256_mul_pd(omega, t);
        const __m256d c = vcos(wt);
        const __m256d sn = vsin(wt);
        h = _mm256_fmadd_pd(e, _mm256_fmadd_pd(A, c, _mm256_mul_pd(B, sn)), hstar);
        // a/b (decay + e (omega sn - decay c)) + b/b (omega - e (decay sn + omega c))
        const __m256d ta = _mm256_fmadd_pd(e, _mm256_fmsub_pd(omega, sn, _mm256_mul_pd(decay, c)), decay);
        const __m256d tb = _mm256_fnmadd_pd(e, _mm256_fmadd_pd(decay, sn, _mm256_mul_pd(omega, c)), omega);
        H = _mm256_fmadd_pd(hstar, t, _mm256_fmadd_pd(a_over_b, ta, _mm256_mul_pd(b_over_b, tb)));
      });
    }
    case DampingRegime::CriticallyDamped: {
      const __m256d k = splat(s.decay);
      const __m256d neg_k = splat(-s.decay);
      const __m256d inv_k = splat(1.0 / s.decay);
      const __m256d inv_k2 = splat(1.0 / (s.decay * s.decay));
      const __m256d one = splat(1.0);
      return accumulate(obs, [&](__m256d t, __m256d, __m256d& h, __m256d& H) {
        // em1 = 1 - e^{-kt}
        const __m256d em1 = _mm256_sub_pd(_mm256_setzero_pd(), vexpm1(_mm256_mul_pd(neg_k, t)));
        const __m256d e = _mm256_sub_pd(one, em1);
        h = _mm256_fmadd_pd(_mm256_fmadd_pd(B, t, A), e, hstar);
        const __m256d inner = _mm256_fnmadd_pd(_mm256_mul_pd(k, t), e, em1);
        H = _mm256_fmadd_pd(hstar, t,
                            _mm256_fmadd_pd(_mm256_mul_pd(A, em1), inv_k, _mm256_mul_pd(_mm256_mul_pd(B, inner), inv_k2)));
      });
    }
    case DampingRegime::Overdamped: {
      const __m256d r1 = splat(s.r1);
      const __m256d r2 = splat(s.r2);
      const __m256d a_r1 = splat(s.A / s.r1);
      const __m256d b_r2 = splat(s.B / s.r2);
      const __m256d base = splat(s.A + s.B + s.hstar);
      return accumulate(obs, [&](__m256d t, __m256d, __m256d& h, __m256d& H) {
        const __m256d m1 = vexpm1(_mm256_mul_pd(r1, t));
        const __m256d m2 = vexpm1(_mm256_mul_pd(r2, t));
        h = _mm256_fmadd_pd(A, m1, _mm256_fmadd_pd(B, m2, base));
        H = _mm256_fmadd_pd(hstar, t, _mm256_fmadd_pd(a_r1, m1, _mm256_mul_pd(b_r2, m2)));
      });
    }
  }
  return kNegInf;
}

double sinusoidal(const Observations& obs, const SinusoidalParams& p) {
  const __m256d omega = splat(p.omega);
  const __m256d base = splat(p.c);
  const __m256d d = splat(p.h0 - p.c);
  const __m256d vw = splat(p.v0 / p.omega);
  const __m256d dw = splat((p.h0 - p.c) / p.omega);
  const __m256d vw2 = splat(p.v0 / (p.omega * p.omega));
  const __m256d one = splat(1.0);
  return accumulate(obs, [&](__m256d t, __m256d, __m256d& h, __m256d& H) {
    const __m256d wt = _mm256_mul_pd(omega, t);
    const __m256d c = vcos(wt);
    const __m256d s = vsin(wt);
    h = _mm256_fmadd_pd(d, c, _mm256_fmadd_pd(vw, s, base));
    H = _mm256_fmadd_pd(base, t, _mm256_fmadd_pd(dw, s, _mm256_mul_pd(vw2, _mm256_sub_pd(one, c))));
  });
}

double exp_beta0(const Observations& obs, const ExpInteractionParams& p) {
  const double root = std::sqrt(p.alpha);
  const double grow = 0.5 * (p.h0 + p.v0 / root);
  const double decay = 0.5 * (p.h0 - p.v0 / root);
  const __m256d vroot = splat(root);
  const __m256d neg_root = splat(-root);
  const __m256d g = splat(grow);
  const __m256d dc = splat(decay);
  const __m256d base = splat(grow + decay);
  const __m256d inv_root = splat(1.0 / root);
  return accumulate(obs, [&](__m256d t, __m256d, __m256d& h, __m256d& H) {
    const __m256d m1 = vexpm1(_mm256_mul_pd(vroot, t));
    const __m256d m2 = vexpm1(_mm256_mul_pd(neg_root, t));
    h = _mm256_fmadd_pd(g, m1, _mm256_fmadd_pd(dc, m2, base));
    H = _mm256_mul_pd(_mm256_fmsub_pd(g, m1, _mm256_mul_pd(dc, m2)), inv_root);
  });
}

double weibull(const Observations& obs, const WeibullCoeffs& w) {
  const __m256d half = splat(0.5);
  const __m256d log_bk = splat(std::log(w.beta * w.kappa));
  const __m256d km1 = splat(w.kappa - 1.0);
  const __m256d kappa = splat(w.kappa);
  const __m256d beta = splat(w.beta);
  __m256d events = _mm256_setzero_pd();
  __m256d cumulative = _mm256_setzero_pd();
  const std::size_t n = obs.t.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d lt = _mm256_loadu_pd(&obs.log_t[i]);
    const __m256d is_event = _mm256_cmp_pd(_mm256_loadu_pd(&obs.delta[i]), half, _CMP_GT_OQ);
    events = _mm256_add_pd(events, _mm256_and_pd(is_event, _mm256_fmadd_pd(km1, lt, log_bk)));
    cumulative = _mm256_fmadd_pd(beta, vexp(_mm256_mul_pd(kappa, lt)), cumulative);
  }
  double ev = hsum(events);
  double cu = hsum(cumulative);
  for (; i < n; ++i) {
    const double lt = obs.log_t[i];
    if (obs.delta[i] > 0.5) ev += std::log(w.beta * w.kappa) + (w.kappa - 1.0) * lt;
    cu += w.beta * std::exp(w.kappa * lt);
  }
  return ev - cu;
}

constexpr KernelTable kAvx2{&damped, &sinusoidal, &exp_beta0, &weibull};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace hazode::simd
