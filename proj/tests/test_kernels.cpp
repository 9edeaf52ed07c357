#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cscn/kernels.hpp"
#include "cscn/linalg.hpp"
#include "cscn/rng.hpp"

using namespace cscn;
namespace k = cscn::kernels;

namespace {

// every SIMD variant must agree with the scalar reference up to
// reassociation error
void check_equivalence(k::Impl variant) {
  if (!k::force_impl(variant)) return;  // not available on this machine
  Rng rng(7);
  for (size_t n : {size_t(0), size_t(1), size_t(3), size_t(4), size_t(7),
                   size_t(64), size_t(257)}) {
    std::vector<double> x(n), y(n);
    std::vector<cd> cx(n), cy(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
      cx[i] = cd(rng.normal(), rng.normal());
      cy[i] = cd(rng.normal(), rng.normal());
    }
    k::force_impl(variant);
    const double dot_v = k::dot(x.data(), y.data(), n);
    const double ss_v = k::sumsq(x.data(), n);
    const cd cdot_v = k::cdot(cx.data(), cy.data(), n);
    const double cn_v = k::cnormsq(cx.data(), n);
    std::vector<double> ax_v = y;
    k::axpy(0.37, x.data(), ax_v.data(), n);
    std::vector<double> sc_v = x;
    k::scal(-1.25, sc_v.data(), n);

    k::force_impl(k::Impl::Scalar);
    const double tol = 1e-12 * (1.0 + double(n));
    CHECK(dot_v == doctest::Approx(k::dot(x.data(), y.data(), n)).epsilon(tol));
    CHECK(ss_v == doctest::Approx(k::sumsq(x.data(), n)).epsilon(tol));
    const cd cdot_s = k::cdot(cx.data(), cy.data(), n);
    CHECK(std::abs(cdot_v - cdot_s) <= tol * (1.0 + std::abs(cdot_s)));
    CHECK(cn_v == doctest::Approx(k::cnormsq(cx.data(), n)).epsilon(tol));
    std::vector<double> ax_s = y;
    k::axpy(0.37, x.data(), ax_s.data(), n);
    std::vector<double> sc_s = x;
    k::scal(-1.25, sc_s.data(), n);
    for (size_t i = 0; i < n; ++i) {
      CHECK(ax_v[i] == doctest::Approx(ax_s[i]).epsilon(1e-14));
      CHECK(sc_v[i] == doctest::Approx(sc_s[i]).epsilon(1e-14));
    }
  }
  k::force_impl(k::Impl::Auto);
}

}  // namespace

TEST_CASE("scalar reference values") {
  k::force_impl(k::Impl::Scalar);
  const double x[] = {1.0, 2.0, 3.0};
  const double y[] = {-1.0, 0.5, 2.0};
  CHECK(k::dot(x, y, 3) == doctest::Approx(6.0));
  CHECK(k::sumsq(x, 3) == doctest::Approx(14.0));
  const cd a[] = {cd(1, 2), cd(0, -1)};
  const cd b[] = {cd(3, -1), cd(2, 2)};
  // conj(1+2i)(3-i) + conj(-i)(2+2i) = (1-2i)(3-i) + i(2+2i) = (1-7i) + (-2+2i)
  const cd d = k::cdot(a, b, 2);
  CHECK(d.real() == doctest::Approx(-1.0));
  CHECK(d.imag() == doctest::Approx(-5.0));
  CHECK(k::cnormsq(a, 2) == doctest::Approx(6.0));
  k::force_impl(k::Impl::Auto);
}

TEST_CASE("avx2 equivalence") { check_equivalence(k::Impl::Avx2); }
TEST_CASE("neon equivalence") { check_equivalence(k::Impl::Neon); }

TEST_CASE("dispatch reports a valid implementation") {
  k::force_impl(k::Impl::Auto);
  const std::string name = k::active_impl();
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}
