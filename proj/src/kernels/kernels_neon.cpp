#include "cscn/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace cscn::kernels::detail {

namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double sumsq_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i] * x[i];
  return r;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

std::complex<double> cdot_neon(const std::complex<double>* x,
                               const std::complex<double>* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  float64x2_t acc_re = vdupq_n_f64(0.0);
  float64x2_t acc_im = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i < n; ++i) {
    float64x2_t vx = vld1q_f64(px + 2 * i);  // [xr xi]
    float64x2_t vy = vld1q_f64(py + 2 * i);  // [yr yi]
    acc_re = vfmaq_f64(acc_re, vx, vy);      // [xr*yr, xi*yi]
    acc_im = vfmaq_f64(acc_im, vx, vextq_f64(vy, vy, 1));  // [xr*yi, xi*yr]
  }
  double re = vaddvq_f64(acc_re);
  double im = vgetq_lane_f64(acc_im, 0) - vgetq_lane_f64(acc_im, 1);
  return {re, im};
}

double cnormsq_neon(const std::complex<double>* x, std::size_t n) {
  return sumsq_neon(reinterpret_cast<const double*>(x), 2 * n);
}

}  // namespace

const KernelTable neon_table = {
    dot_neon, sumsq_neon,   axpy_neon,
    scal_neon, cdot_neon, cnormsq_neon,
    "neon",
};

}  // namespace cscn::kernels::detail

#endif  // aarch64
