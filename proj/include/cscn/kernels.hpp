#pragma once

#include <complex>
#include <cstddef>

// Data-parallel arithmetic kernels used by the dense linear algebra layer
// and the channel/SINR evaluation paths. Every kernel has a scalar
// reference implementation and, where the platform provides it, a SIMD
// variant (AVX2+FMA on x86-64, NEON on aarch64). The active variant is
// selected once at runtime from CPU capabilities; CSCN_SIMD=scalar|avx2|
// neon|auto overrides the probe. SIMD results may differ from scalar by
// floating-point reassociation only; the equivalence tests bound that.

namespace cscn::kernels {

enum class Impl { Auto, Scalar, Avx2, Neon };

// Name of the implementation currently dispatched ("scalar", "avx2", "neon").
const char* active_impl() noexcept;

// Force a specific implementation (tests). Impl::Auto re-runs the probe.
// Returns false if the requested variant is unavailable on this machine.
bool force_impl(Impl impl) noexcept;

double dot(const double* x, const double* y, std::size_t n) noexcept;
double sumsq(const double* x, std::size_t n) noexcept;
void axpy(double a, const double* x, double* y, std::size_t n) noexcept;
void scal(double a, double* x, std::size_t n) noexcept;

// sum_i conj(x_i) * y_i over interleaved (re,im) complex arrays
std::complex<double> cdot(const std::complex<double>* x,
                          const std::complex<double>* y,
                          std::size_t n) noexcept;
double cnormsq(const std::complex<double>* x, std::size_t n) noexcept;

namespace detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  std::complex<double> (*cdot)(const std::complex<double>*,
                               const std::complex<double>*, std::size_t);
  double (*cnormsq)(const std::complex<double>*, std::size_t);
  const char* name;
};

extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif

}  // namespace detail

}  // namespace cscn::kernels
