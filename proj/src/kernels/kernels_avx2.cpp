#include "cscn/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace cscn::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    acc = _mm256_fmadd_pd(vx, vy, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double sumsq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(vx, vx, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

// Two interleaved complex doubles per 256-bit lane: [xr0 xi0 xr1 xi1].
std::complex<double> cdot_avx2(const std::complex<double>* x,
                               const std::complex<double>* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vx = _mm256_loadu_pd(px + 2 * i);
    __m256d vy = _mm256_loadu_pd(py + 2 * i);
    // re: xr*yr + xi*yi ; im: xr*yi - xi*yr
    acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
    __m256d vy_sw = _mm256_permute_pd(vy, 0x5);  // [yi0 yr0 yi1 yr1]
    acc_im = _mm256_fmadd_pd(vx, vy_sw, acc_im);
  }
  // acc_re lanes: [r0a r0b r1a r1b] with re = sum of pairs
  double re = hsum(acc_re);
  // acc_im lanes hold xr*yi at even slots and xi*yr at odd slots
  alignas(32) double t[4];
  _mm256_store_pd(t, acc_im);
  double im = (t[0] - t[1]) + (t[2] - t[3]);
  for (; i < n; ++i) {
    const double xr = px[2 * i], xi = px[2 * i + 1];
    const double yr = py[2 * i], yi = py[2 * i + 1];
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

double cnormsq_avx2(const std::complex<double>* x, std::size_t n) {
  return sumsq_avx2(reinterpret_cast<const double*>(x), 2 * n);
}

}  // namespace

const KernelTable avx2_table = {
    dot_avx2, sumsq_avx2,   axpy_avx2,
    scal_avx2, cdot_avx2, cnormsq_avx2,
    "avx2",
};

}  // namespace cscn::kernels::detail

#endif  // x86-64
