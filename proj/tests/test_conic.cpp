#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cscn/conic.hpp"

using namespace cscn::conic;

namespace {

Affine unit(int i, double c = 1.0, double off = 0.0) {
  Affine a;
  a.add(i, c);
  a.offset = off;
  return a;
}

}  // namespace

TEST_CASE("linear program: min x s.t. x >= 3") {
  Problem p;
  int x = p.add_var();
  p.obj_linear = unit(x);
  p.lin.push_back({unit(x, -1.0, 3.0)});  // 3 - x <= 0
  auto s = solve(p);
  REQUIRE(s.ok());
  CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(s.max_violation <= 1e-7);
}

TEST_CASE("projection: min ||v||^2 s.t. Re(h^H v) >= 1 with h = (1, 0)") {
  // complex dim 2 lifted to 4 reals (re0, im0, re1, im1)
  Problem p;
  int v0r = p.add_var(), v0i = p.add_var(), v1r = p.add_var(), v1i = p.add_var();
  for (int i : {v0r, v0i, v1r, v1i}) p.obj_squares.push_back(unit(i));
  p.lin.push_back({unit(v0r, -1.0, 1.0)});  // 1 - Re(v0) <= 0
  auto s = solve(p);
  REQUIRE(s.ok());
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(s.x[size_t(v0r)] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(s.x[size_t(v0i)]) < 1e-4);
  CHECK(std::abs(s.x[size_t(v1r)]) < 1e-4);
}

TEST_CASE("exponential cone boundary: min t s.t. exp(x) <= t, x >= 1") {
  for (bool fallback : {false, true}) {
    Problem p;
    int x = p.add_var(), t = p.add_var();
    p.obj_linear = unit(t);
    p.expc.push_back({unit(x), unit(t)});
    p.lin.push_back({unit(x, -1.0, 1.0)});  // 1 - x <= 0
    Settings st;
    st.exp_outer_linearization = fallback;
    auto s = solve(p, st);
    REQUIRE(s.ok());
    CHECK(s.x[size_t(x)] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(s.objective == doctest::Approx(std::exp(1.0)).epsilon(1e-4));
    CHECK(s.max_violation <= 1e-6);
  }
}

TEST_CASE("native and fallback exponential routes agree") {
  // min 2t + u s.t. exp(x - 1) <= t, exp(-x) <= u  (smooth interior optimum)
  Problem p;
  int x = p.add_var(), t = p.add_var(), u = p.add_var();
  p.obj_linear = unit(t, 2.0);
  p.obj_linear.add(u, 1.0);
  p.expc.push_back({unit(x, 1.0, -1.0), unit(t)});
  p.expc.push_back({unit(x, -1.0), unit(u)});
  Settings native;
  auto a = solve(p, native);
  Settings fb;
  fb.exp_outer_linearization = true;
  auto b = solve(p, fb);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-5));
  CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-3));
}

TEST_CASE("second-order cone: max x inside the unit disk") {
  Problem p;
  int x = p.add_var(), y = p.add_var();
  p.obj_linear = unit(x, -1.0);
  SocConstraint sc;
  sc.rows = {unit(x), unit(y)};
  sc.rhs.offset = 1.0;
  p.soc.push_back(sc);
  auto s = solve(p);
  REQUIRE(s.ok());
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::abs(s.x[1]) < 1e-4);
}

TEST_CASE("convex quadratic constraint: min x s.t. x^2 <= 4") {
  Problem p;
  int x = p.add_var();
  p.obj_linear = unit(x);
  QuadConstraint qc;
  qc.squares = {unit(x)};
  qc.lin.offset = -4.0;
  p.quad.push_back(qc);
  auto s = solve(p);
  REQUIRE(s.ok());
  CHECK(s.x[0] == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("infeasible system is certified") {
  Problem p;
  int x = p.add_var();
  p.obj_linear = unit(x);
  p.lin.push_back({unit(x, -1.0, 3.0)});   // x >= 3
  p.lin.push_back({unit(x, 1.0, -2.0)});   // x <= 2
  auto s = solve(p);
  CHECK(s.status == Status::Infeasible);
}

TEST_CASE("equality constraints via null-space elimination") {
  // min x^2 + y^2 + z^2 s.t. x + y + z = 3  ->  (1,1,1)
  Problem p;
  int x = p.add_var(), y = p.add_var(), z = p.add_var();
  for (int i : {x, y, z}) p.obj_squares.push_back(unit(i));
  Affine e = unit(x);
  e.add(y, 1.0);
  e.add(z, 1.0);
  e.offset = -3.0;
  p.eq.push_back({e});
  auto s = solve(p);
  REQUIRE(s.ok());
  for (int i : {x, y, z})
    CHECK(s.x[size_t(i)] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bounds act as constraints") {
  Problem p;
  int x = p.add_var(0.25, 0.75);
  p.obj_linear = unit(x);
  auto s = solve(p);
  REQUIRE(s.ok());
  CHECK(s.x[0] == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("argmin invariance under positive objective scaling") {
  Problem p;
  int x = p.add_var(), y = p.add_var();
  // min (x-2)^2 + (y+1)^2 s.t. x + y >= 2
  Affine sx = unit(x);
  sx.offset = -2.0;
  Affine sy = unit(y);
  sy.offset = 1.0;
  p.obj_squares = {sx, sy};
  Affine c = unit(x, -1.0, 2.0);
  c.add(y, -1.0);
  p.lin.push_back({c});
  auto a = solve(p);
  Problem q = p;
  for (auto& sq : q.obj_squares)
    for (auto& co : sq.coef) co *= std::sqrt(50.0);
  for (auto& sq : q.obj_squares) sq.offset *= std::sqrt(50.0);
  auto b = solve(q);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-5));
  CHECK(a.x[1] == doctest::Approx(b.x[1]).epsilon(1e-5));
}

TEST_CASE("hint accelerates and does not change the answer") {
  Problem p;
  int x = p.add_var();
  p.obj_linear = unit(x);
  p.lin.push_back({unit(x, -1.0, 3.0)});
  std::vector<double> hint = {3.0000001};
  auto s = solve(p, {}, hint);
  REQUIRE(s.ok());
  CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("problem dump is self-describing") {
  Problem p;
  int x = p.add_var(0.0, 1.0);
  p.obj_linear = unit(x);
  p.expc.push_back({unit(x), unit(x, 2.0, 1.0)});
  SocConstraint sc;
  sc.rows = {unit(x)};
  sc.rhs.offset = 2.0;
  p.soc.push_back(sc);
  std::ostringstream os;
  p.dump(os);
  const std::string d = os.str();
  CHECK(d.find("conic_problem v1") != std::string::npos);
  CHECK(d.find("vars 1") != std::string::npos);
  CHECK(d.find("soc 1") != std::string::npos);
  CHECK(d.find("exp") != std::string::npos);
}
