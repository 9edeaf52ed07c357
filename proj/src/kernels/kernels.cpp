#include "cscn/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace cscn::kernels {

namespace {

using detail::KernelTable;

const KernelTable* probe() {
  const char* env = std::getenv("CSCN_SIMD");
#if defined(__x86_64__) || defined(_M_X64)
  if (env && std::strcmp(env, "scalar") == 0) return &detail::scalar_table;
  if (env && std::strcmp(env, "avx2") == 0) return &detail::avx2_table;
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &detail::avx2_table;
#elif defined(__aarch64__)
  if (env && std::strcmp(env, "scalar") == 0) return &detail::scalar_table;
  if (env && std::strcmp(env, "neon") == 0) return &detail::neon_table;
  return &detail::neon_table;
#else
  (void)env;
#endif
  return &detail::scalar_table;
}

const KernelTable* g_table = probe();

}  // namespace

const char* active_impl() noexcept { return g_table->name; }

bool force_impl(Impl impl) noexcept {
  switch (impl) {
    case Impl::Auto:
      g_table = probe();
      return true;
    case Impl::Scalar:
      g_table = &detail::scalar_table;
      return true;
    case Impl::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        g_table = &detail::avx2_table;
        return true;
      }
#endif
      return false;
    case Impl::Neon:
#if defined(__aarch64__)
      g_table = &detail::neon_table;
      return true;
#else
      return false;
#endif
  }
  return false;
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  return g_table->dot(x, y, n);
}
double sumsq(const double* x, std::size_t n) noexcept {
  return g_table->sumsq(x, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) noexcept {
  g_table->axpy(a, x, y, n);
}
void scal(double a, double* x, std::size_t n) noexcept {
  g_table->scal(a, x, n);
}
std::complex<double> cdot(const std::complex<double>* x,
                          const std::complex<double>* y,
                          std::size_t n) noexcept {
  return g_table->cdot(x, y, n);
}
double cnormsq(const std::complex<double>* x, std::size_t n) noexcept {
  return g_table->cnormsq(x, n);
}

}  // namespace cscn::kernels
