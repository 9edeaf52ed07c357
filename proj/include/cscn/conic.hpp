#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cscn::conic {

// Sparse affine functional a^T x + b.
struct Affine {
  std::vector<int> idx;
  std::vector<double> coef;
  double offset = 0.0;

  void add(int i, double c) {
    idx.push_back(i);
    coef.push_back(c);
  }
  double eval(std::span<const double> x) const {
    double v = offset;
    for (size_t j = 0; j < idx.size(); ++j) v += coef[j] * x[size_t(idx[j])];
    return v;
  }
};

// expr <= 0
struct LinearConstraint {
  Affine expr;
};

// sum_j squares[j](x)^2 + lin(x) <= 0
struct QuadConstraint {
  std::vector<Affine> squares;
  Affine lin;
};

// || rows(x) ||_2 <= rhs(x)
struct SocConstraint {
  std::vector<Affine> rows;
  Affine rhs;
};

// exp(arg(x)) <= bound(x)
struct ExpConstraint {
  Affine arg;
  Affine bound;
};

// Convex problem over linear, second-order-cone, convex-quadratic and
// exponential constraints; complex model quantities enter as interleaved
// (re, im) pairs of real variables.
struct Problem {
  int num_vars = 0;
  std::vector<double> lower, upper;

  std::vector<Affine> obj_squares;  // objective: sum of squares + linear
  Affine obj_linear;

  std::vector<LinearConstraint> lin;  // expr <= 0
  std::vector<LinearConstraint> eq;   // expr == 0
  std::vector<QuadConstraint> quad;
  std::vector<SocConstraint> soc;
  std::vector<ExpConstraint> expc;

  int add_var(double lo = -std::numeric_limits<double>::infinity(),
              double hi = std::numeric_limits<double>::infinity()) {
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars++;
  }

  double objective_value(std::span<const double> x) const;
  // largest violation across every constraint class (<= 0 means feasible)
  double max_violation(std::span<const double> x) const;

  // self-describing text form for offline debugging / differential testing
  void dump(std::ostream& os) const;
};

enum class Status { Optimal, Infeasible, IterationLimit, NumericalTrouble };

const char* status_name(Status s);

struct Settings {
  double feas_tol = 1e-7;
  // duality-gap target relative to max(1, |objective|)
  double opt_tol = 1e-6;
  int max_newton = 200;      // Newton iteration cap per stage
  double barrier_mu = 20.0;  // path-following multiplier
  double t0 = 1.0;           // main-stage barrier start; raise for warm hints
  // hint is strictly interior: skip phase I when the domain check agrees
  bool hint_is_interior = false;
  // fallback: iterated tangent outer linearization of exp constraints
  bool exp_outer_linearization = false;
};

struct Solution {
  Status status = Status::NumericalTrouble;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double max_violation = std::numeric_limits<double>::quiet_NaN();
  int newton_iters = 0;
  std::string message;

  bool ok() const { return status == Status::Optimal; }
};

// Barrier interior-point solve. `hint` (optional) seeds the phase-I start.
Solution solve(const Problem& p, const Settings& settings = {},
               std::span<const double> hint = {});

}  // namespace cscn::conic
