#include "cscn/conic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cscn/linalg.hpp"

namespace cscn::conic {

namespace k = cscn::kernels;



namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// lowered model with per-constraint cached curvature
// ---------------------------------------------------------------------------

// sum of outer products a_j a_j^T over the union support of the a_j
struct PackedSym {
  std::vector<int> support;
  Mat m;  // support x support, symmetric, fully stored
};

std::vector<int> union_support(const std::vector<const Affine*>& affs) {
  std::vector<int> s;
  for (const Affine* a : affs)
    s.insert(s.end(), a->idx.begin(), a->idx.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

int support_pos(const std::vector<int>& support, int var) {
  return int(std::lower_bound(support.begin(), support.end(), var) -
             support.begin());
}

PackedSym pack_outer(const std::vector<Affine>& squares) {
  PackedSym p;
  std::vector<const Affine*> ptrs;
  for (const auto& a : squares) ptrs.push_back(&a);
  p.support = union_support(ptrs);
  const int ns = int(p.support.size());
  p.m = Mat(ns, ns, 0.0);
  std::vector<double> dense(static_cast<size_t>(ns));
  for (const auto& a : squares) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (size_t j = 0; j < a.idx.size(); ++j)
      dense[size_t(support_pos(p.support, a.idx[j]))] += a.coef[j];
    for (int r = 0; r < ns; ++r) {
      if (dense[size_t(r)] == 0.0) continue;
      k::axpy(dense[size_t(r)], dense.data(), p.m.row(r), size_t(ns));
    }
  }
  return p;
}

// dense coefficient row over a constraint's support, kernel-friendly
struct DenseRow {
  Vec coef;
  double offset = 0.0;
};

DenseRow densify(const Affine& a, const std::vector<int>& support) {
  DenseRow r;
  r.coef.assign(support.size(), 0.0);
  r.offset = a.offset;
  for (size_t j = 0; j < a.idx.size(); ++j)
    r.coef[size_t(support_pos(support, a.idx[j]))] += a.coef[j];
  return r;
}

struct ConsLin {
  Affine a;
  std::vector<int> support;
  DenseRow ca;
};
struct ConsQuad {
  std::vector<Affine> sq;
  Affine lin;
  PackedSym hess;  // sum a_j a_j^T (without the factor 2)
  std::vector<int> support;  // union of squares and linear part
  std::vector<DenseRow> csq;
  DenseRow clin;
};
struct ConsSoc {
  std::vector<Affine> rows;
  Affine rhs;
  PackedSym rows_pack;
  std::vector<int> support;  // union of rows and rhs
  std::vector<DenseRow> crow;
  DenseRow crhs;
};
struct ConsExp {
  Affine arg, bound;
  std::vector<int> support;
  DenseRow carg, cbound;
};

std::vector<int> merged_support(const std::vector<Affine>& list,
                                const Affine* extra) {
  std::vector<const Affine*> ptrs;
  for (const auto& a : list) ptrs.push_back(&a);
  if (extra) ptrs.push_back(extra);
  return union_support(ptrs);
}

// scratch reused across Newton iterations
struct Workspace {
  Vec gath, buf, buf2;
  void fit(size_t n) {
    if (gath.size() < n) {
      gath.resize(n);
      buf.resize(n);
      buf2.resize(n);
    }
  }
};

struct Model {
  int n = 0;
  std::vector<double> lo, hi;
  std::vector<Affine> obj_sq;
  Affine obj_lin;
  PackedSym obj_pack;
  std::vector<ConsLin> lin;
  std::vector<ConsQuad> quad;
  std::vector<ConsSoc> soc;
  std::vector<ConsExp> expc;

  double nu = 0.0;  // total barrier parameter

  std::vector<int> obj_support;
  std::vector<DenseRow> obj_csq;
  size_t max_support = 0;

  void prepare() {
    obj_pack = pack_outer(obj_sq);
    obj_support = obj_pack.support;
    obj_csq.clear();
    for (const auto& a : obj_sq) obj_csq.push_back(densify(a, obj_support));
    for (auto& c : lin) {
      c.support = merged_support({}, &c.a);
      c.ca = densify(c.a, c.support);
    }
    for (auto& q : quad) {
      q.hess = pack_outer(q.sq);
      q.support = merged_support(q.sq, &q.lin);
      q.csq.clear();
      for (const auto& a : q.sq) q.csq.push_back(densify(a, q.support));
      q.clin = densify(q.lin, q.support);
    }
    for (auto& s : soc) {
      s.rows_pack = pack_outer(s.rows);
      s.support = merged_support(s.rows, &s.rhs);
      s.crow.clear();
      for (const auto& a : s.rows) s.crow.push_back(densify(a, s.support));
      s.crhs = densify(s.rhs, s.support);
    }
    for (auto& e : expc) {
      e.support = merged_support({e.arg, e.bound}, nullptr);
      e.carg = densify(e.arg, e.support);
      e.cbound = densify(e.bound, e.support);
    }
    max_support = obj_support.size();
    for (auto& c : lin) max_support = std::max(max_support, c.support.size());
    for (auto& q : quad) max_support = std::max(max_support, q.support.size());
    for (auto& s : soc) max_support = std::max(max_support, s.support.size());
    for (auto& e : expc) max_support = std::max(max_support, e.support.size());
    nu = double(lin.size() + quad.size()) + 2.0 * double(soc.size()) +
         2.0 * double(expc.size());
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(lo[size_t(i)])) nu += 1.0;
      if (std::isfinite(hi[size_t(i)])) nu += 1.0;
    }
  }

  double objective(std::span<const double> x) const {
    double v = obj_lin.eval(x);
    for (const auto& a : obj_sq) {
      const double s = a.eval(x);
      v += s * s;
    }
    return v;
  }
};

void add_packed(Mat& H, const PackedSym& p, double scale) {
  const int ns = int(p.support.size());
  for (int r = 0; r < ns; ++r) {
    double* hr = H.row(p.support[size_t(r)]);
    const double* pr = p.m.row(r);
    for (int c = 0; c < ns; ++c) hr[p.support[size_t(c)]] += scale * pr[c];
  }
}

// strict interior test for the full barrier domain
bool in_domain(const Model& M, std::span<const double> x) {
  for (int i = 0; i < M.n; ++i) {
    if (x[size_t(i)] <= M.lo[size_t(i)] || x[size_t(i)] >= M.hi[size_t(i)])
      return false;
  }
  for (const auto& c : M.lin)
    if (c.a.eval(x) >= 0.0) return false;
  for (const auto& c : M.quad) {
    double g = c.lin.eval(x);
    for (const auto& a : c.sq) {
      const double s = a.eval(x);
      g += s * s;
    }
    if (g >= 0.0) return false;
  }
  for (const auto& c : M.soc) {
    const double r = c.rhs.eval(x);
    if (r <= 0.0) return false;
    double q = 0.0;
    for (const auto& a : c.rows) {
      const double s = a.eval(x);
      q += s * s;
    }
    if (r * r - q <= 0.0) return false;
  }
  for (const auto& c : M.expc) {
    const double v = c.bound.eval(x);
    if (v <= 0.0) return false;
    if (std::log(v) - c.arg.eval(x) <= 0.0) return false;
  }
  return true;
}

// t * f0 + barrier value in one sweep; +inf outside the domain
inline void gather(std::span<const double> x, const std::vector<int>& support,
                   Vec& out) {
  for (size_t i = 0; i < support.size(); ++i)
    out[i] = x[size_t(support[i])];
}

double merit(const Model& M, std::span<const double> x, double t,
             Workspace& ws) {
  ws.fit(M.max_support);
  double val = 0.0;
  for (int i = 0; i < M.n; ++i) {
    if (std::isfinite(M.lo[size_t(i)])) {
      const double d = x[size_t(i)] - M.lo[size_t(i)];
      if (d <= 0.0) return kInf;
      val -= std::log(d);
    }
    if (std::isfinite(M.hi[size_t(i)])) {
      const double d = M.hi[size_t(i)] - x[size_t(i)];
      if (d <= 0.0) return kInf;
      val -= std::log(d);
    }
  }
  {
    double f0 = M.obj_lin.eval(x);
    gather(x, M.obj_support, ws.gath);
    for (const auto& r : M.obj_csq) {
      const double s = r.offset + k::dot(r.coef.data(), ws.gath.data(), r.coef.size());
      f0 += s * s;
    }
    val += t * f0;
  }
  for (const auto& c : M.lin) {
    gather(x, c.support, ws.gath);
    const double g =
        c.ca.offset + k::dot(c.ca.coef.data(), ws.gath.data(), c.ca.coef.size());
    if (g >= 0.0) return kInf;
    val -= std::log(-g);
  }
  for (const auto& c : M.quad) {
    gather(x, c.support, ws.gath);
    double g = c.clin.offset +
               k::dot(c.clin.coef.data(), ws.gath.data(), c.clin.coef.size());
    for (const auto& r : c.csq) {
      const double s =
          r.offset + k::dot(r.coef.data(), ws.gath.data(), r.coef.size());
      g += s * s;
    }
    if (g >= 0.0) return kInf;
    val -= std::log(-g);
  }
  for (const auto& c : M.soc) {
    gather(x, c.support, ws.gath);
    const double r = c.crhs.offset + k::dot(c.crhs.coef.data(), ws.gath.data(),
                                            c.crhs.coef.size());
    if (r <= 0.0) return kInf;
    double q = 0.0;
    for (const auto& row : c.crow) {
      const double s =
          row.offset + k::dot(row.coef.data(), ws.gath.data(), row.coef.size());
      q += s * s;
    }
    const double den = r * r - q;
    if (den <= 0.0) return kInf;
    val -= std::log(den);
  }
  for (const auto& c : M.expc) {
    gather(x, c.support, ws.gath);
    const double v = c.cbound.offset + k::dot(c.cbound.coef.data(),
                                              ws.gath.data(), c.cbound.coef.size());
    if (v <= 0.0) return kInf;
    const double u = c.carg.offset +
                     k::dot(c.carg.coef.data(), ws.gath.data(), c.carg.coef.size());
    const double psi = std::log(v) - u;
    if (psi <= 0.0) return kInf;
    val -= std::log(psi) + std::log(v);
  }
  return val;
}

// gradient and Hessian of t * f0 + barrier at a strictly interior x
void add_rank1_support(Mat& H, const std::vector<int>& support, const Vec& g,
                       double scale, size_t len) {
  for (size_t r = 0; r < len; ++r) {
    const double w = scale * g[r];
    if (w == 0.0) continue;
    double* hr = H.row(support[r]);
    for (size_t c = 0; c < len; ++c) hr[support[c]] += w * g[c];
  }
}

void assemble(const Model& M, std::span<const double> x, double t, Vec& grad,
              Mat& H, Workspace& ws) {
  const int n = M.n;
  ws.fit(M.max_support);
  std::fill(grad.begin(), grad.end(), 0.0);
  std::fill(H.a.begin(), H.a.end(), 0.0);

  // objective
  {
    for (size_t j = 0; j < M.obj_lin.idx.size(); ++j)
      grad[size_t(M.obj_lin.idx[j])] += t * M.obj_lin.coef[j];
    const auto& sup = M.obj_support;
    gather(x, sup, ws.gath);
    std::fill(ws.buf.begin(), ws.buf.begin() + sup.size(), 0.0);
    for (const auto& r : M.obj_csq) {
      const double s =
          r.offset + k::dot(r.coef.data(), ws.gath.data(), r.coef.size());
      k::axpy(2.0 * s, r.coef.data(), ws.buf.data(), r.coef.size());
    }
    for (size_t i = 0; i < sup.size(); ++i)
      grad[size_t(sup[i])] += t * ws.buf[i];
    add_packed(H, M.obj_pack, 2.0 * t);
  }

  // bounds
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(M.lo[size_t(i)])) {
      const double d = x[size_t(i)] - M.lo[size_t(i)];
      grad[size_t(i)] -= 1.0 / d;
      H(i, i) += 1.0 / (d * d);
    }
    if (std::isfinite(M.hi[size_t(i)])) {
      const double d = M.hi[size_t(i)] - x[size_t(i)];
      grad[size_t(i)] += 1.0 / d;
      H(i, i) += 1.0 / (d * d);
    }
  }

  for (const auto& c : M.lin) {
    gather(x, c.support, ws.gath);
    const double g =
        c.ca.offset + k::dot(c.ca.coef.data(), ws.gath.data(), c.ca.coef.size());
    const double w = 1.0 / (-g);
    for (size_t i = 0; i < c.support.size(); ++i)
      grad[size_t(c.support[i])] += w * c.ca.coef[i];
    add_rank1_support(H, c.support, c.ca.coef, w * w, c.support.size());
  }

  for (const auto& c : M.quad) {
    const auto& sup = c.support;
    gather(x, sup, ws.gath);
    double g = c.clin.offset +
               k::dot(c.clin.coef.data(), ws.gath.data(), c.clin.coef.size());
    // grad of g over the support
    std::copy(c.clin.coef.begin(), c.clin.coef.end(), ws.buf.begin());
    for (const auto& r : c.csq) {
      const double s =
          r.offset + k::dot(r.coef.data(), ws.gath.data(), r.coef.size());
      g += s * s;
      k::axpy(2.0 * s, r.coef.data(), ws.buf.data(), r.coef.size());
    }
    const double w = 1.0 / (-g);
    for (size_t i = 0; i < sup.size(); ++i)
      grad[size_t(sup[i])] += w * ws.buf[i];
    add_packed(H, c.hess, 2.0 * w);
    add_rank1_support(H, sup, ws.buf, w * w, sup.size());
  }

  for (const auto& c : M.soc) {
    const auto& sup = c.support;
    gather(x, sup, ws.gath);
    const double r = c.crhs.offset + k::dot(c.crhs.coef.data(), ws.gath.data(),
                                            c.crhs.coef.size());
    double q = 0.0;
    // grad den = 2 r rhs_coef - sum 2 s_j row_j
    for (size_t i = 0; i < sup.size(); ++i)
      ws.buf[i] = 2.0 * r * c.crhs.coef[i];
    for (const auto& row : c.crow) {
      const double s =
          row.offset + k::dot(row.coef.data(), ws.gath.data(), row.coef.size());
      q += s * s;
      k::axpy(-2.0 * s, row.coef.data(), ws.buf.data(), row.coef.size());
    }
    const double den = r * r - q;
    const double wd = 1.0 / den;
    for (size_t i = 0; i < sup.size(); ++i)
      grad[size_t(sup[i])] -= wd * ws.buf[i];
    add_rank1_support(H, sup, ws.buf, wd * wd, sup.size());
    add_packed(H, c.rows_pack, 2.0 * wd);
    add_rank1_support(H, sup, c.crhs.coef, -2.0 * wd, sup.size());
  }

  for (const auto& c : M.expc) {
    const auto& sup = c.support;
    gather(x, sup, ws.gath);
    const double v = c.cbound.offset + k::dot(c.cbound.coef.data(),
                                              ws.gath.data(), c.cbound.coef.size());
    const double u = c.carg.offset +
                     k::dot(c.carg.coef.data(), ws.gath.data(), c.carg.coef.size());
    const double psi = std::log(v) - u;
    // p = bound_coef / v - arg_coef
    for (size_t i = 0; i < sup.size(); ++i)
      ws.buf[i] = c.cbound.coef[i] / v - c.carg.coef[i];
    for (size_t i = 0; i < sup.size(); ++i)
      grad[size_t(sup[i])] += -ws.buf[i] / psi - c.cbound.coef[i] / v;
    add_rank1_support(H, sup, ws.buf, 1.0 / (psi * psi), sup.size());
    add_rank1_support(H, sup, c.cbound.coef, (1.0 / psi + 1.0) / (v * v),
                      sup.size());
  }
}

struct StageOutcome {
  bool converged = false;
  bool early = false;
  int iters = 0;
  bool numerical = false;
};

// Path-following on t*f0 + barrier. early_stop, when set, is checked after
// every accepted Newton step.
template <typename EarlyStop>
StageOutcome run_barrier(const Model& M, Vec& x, const Settings& st,
                         double gap_scale_floor, double t_start,
                         EarlyStop early_stop) {
  StageOutcome out;
  const int n = M.n;
  Vec grad(static_cast<size_t>(n));
  Mat H(n, n);
  Workspace ws;
  Vec step(static_cast<size_t>(n)), xt(static_cast<size_t>(n));

  double t = std::max(1.0, t_start);
  int stalled_rounds = 0;
  while (true) {
    // inner Newton loop at fixed t; intermediate rounds only need rough
    // centering, the final round polishes
    const double target_now =
        st.opt_tol * std::max(gap_scale_floor, std::abs(M.objective(x)));
    const bool final_round = M.nu / t <= target_now * st.barrier_mu;
    const double inner_tol = final_round ? 1e-10 : 1e-4;
    bool stalled = false;
    for (;;) {
      if (out.iters >= st.max_newton) return out;
      assemble(M, x, t, grad, H, ws);
      // factor with an escalating per-diagonal ridge; multiplicative so the
      // huge curvature spread near vertices does not drown flat directions.
      // H is factored in place and only rebuilt on the rare retry.
      double ridge = 1e-13;
      bool factored = false;
      bool h_fresh = true;
      for (int attempt = 0; attempt < 10 && !factored; ++attempt) {
        if (!h_fresh) assemble(M, x, t, grad, H, ws);
        for (int i = 0; i < n; ++i)
          H(i, i) += ridge * (std::abs(H(i, i)) + 1e-12);
        factored = llt_factor(H);
        h_fresh = false;
        if (!factored) ridge *= 100.0;
      }
      if (!factored) {
        out.numerical = true;
        return out;
      }
      for (int i = 0; i < n; ++i) step[size_t(i)] = -grad[size_t(i)];
      llt_solve(H, step);
      const double dec = -k::dot(grad.data(), step.data(), size_t(n));
      ++out.iters;
      if (dec <= 0.0) break;  // ascent direction from ill-conditioning: stop
      const double f0 = merit(M, x, t, ws);
      if (0.5 * dec <= inner_tol * (1.0 + std::abs(f0))) break;
      double alpha = 1.0;
      bool moved = false;
      double ft = f0;
      for (int ls = 0; ls < 60; ++ls) {
        for (int i = 0; i < n; ++i)
          xt[size_t(i)] = x[size_t(i)] + alpha * step[size_t(i)];
        ft = merit(M, xt, t, ws);
        if (ft <= f0 - 0.01 * alpha * dec) {
          x = xt;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        stalled = true;  // line search cannot improve at this precision
        break;
      }
      if (early_stop(x)) {
        out.early = true;
        out.converged = true;
        return out;
      }
      if (f0 - ft <= 1e-13 * (1.0 + std::abs(ft))) {
        stalled = true;  // merit progress below the double-precision floor
        break;
      }
    }
    stalled_rounds = stalled ? stalled_rounds + 1 : 0;
    if (stalled_rounds >= 2) {
      out.converged = true;  // the central path cannot be tracked further
      return out;
    }
    const double gap = M.nu / t;
    const double target =
        st.opt_tol * std::max(gap_scale_floor, std::abs(M.objective(x)));
    if (gap <= target) {
      out.converged = true;
      return out;
    }
    t *= st.barrier_mu;
  }
}

// ---------------------------------------------------------------------------
// lowering from the public Problem
// ---------------------------------------------------------------------------

Model lower(const Problem& p) {
  Model M;
  M.n = p.num_vars;
  M.lo = p.lower;
  M.hi = p.upper;
  M.obj_sq = p.obj_squares;
  M.obj_lin = p.obj_linear;
  for (const auto& c : p.lin) {
    ConsLin cl;
    cl.a = c.expr;
    M.lin.push_back(std::move(cl));
  }
  for (const auto& c : p.quad) {
    ConsQuad cq;
    cq.sq = c.squares;
    cq.lin = c.lin;
    M.quad.push_back(std::move(cq));
  }
  for (const auto& c : p.soc) {
    ConsSoc cs;
    cs.rows = c.rows;
    cs.rhs = c.rhs;
    M.soc.push_back(std::move(cs));
  }
  for (const auto& c : p.expc) {
    ConsExp ce;
    ce.arg = c.arg;
    ce.bound = c.bound;
    M.expc.push_back(std::move(ce));
  }
  return M;
}

// phase-I model: minimize s with every non-bound constraint relaxed by s
Model phase1_model(const Model& M0, int* s_index) {
  Model M;
  M.n = M0.n + 1;
  *s_index = M0.n;
  M.lo = M0.lo;
  M.hi = M0.hi;
  M.lo.push_back(-1.0);
  M.hi.push_back(kInf);
  M.obj_lin.add(*s_index, 1.0);
  M.lin = M0.lin;
  for (auto& c : M.lin) c.a.add(*s_index, -1.0);
  M.quad = M0.quad;
  for (auto& c : M.quad) c.lin.add(*s_index, -1.0);
  M.soc = M0.soc;
  for (auto& c : M.soc) c.rhs.add(*s_index, 1.0);
  M.expc = M0.expc;
  for (auto& c : M.expc) c.bound.add(*s_index, 1.0);
  return M;
}

double required_slack(const Model& M, std::span<const double> x) {
  double s = 0.0;
  for (const auto& c : M.lin) s = std::max(s, c.a.eval(x));
  for (const auto& c : M.quad) {
    double g = c.lin.eval(x);
    for (const auto& a : c.sq) {
      const double t = a.eval(x);
      g += t * t;
    }
    s = std::max(s, g);
  }
  for (const auto& c : M.soc) {
    double q = 0.0;
    for (const auto& a : c.rows) {
      const double t = a.eval(x);
      q += t * t;
    }
    s = std::max(s, std::sqrt(q) - c.rhs.eval(x));
  }
  for (const auto& c : M.expc) {
    const double u = c.arg.eval(x);
    const double v = c.bound.eval(x);
    s = std::max(s, std::exp(std::min(u, 300.0)) - v);
  }
  return s;
}

Solution solve_lowered(const Model& M0, const Settings& st,
                       std::span<const double> hint);

// hint-seeded starting point strictly inside the box
Vec boxed_start(const Model& M, std::span<const double> hint) {
  Vec x(size_t(M.n), 0.0);
  for (int i = 0; i < M.n; ++i) {
    const double lo = M.lo[size_t(i)], hi = M.hi[size_t(i)];
    double v = (i < int(hint.size()) && std::isfinite(hint[size_t(i)]))
                   ? hint[size_t(i)]
                   : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(lo) && std::isfinite(hi)) {
      const double inset = 1e-4 * (hi - lo);
      if (!std::isfinite(v)) v = 0.5 * (lo + hi);
      v = std::clamp(v, lo + inset, hi - inset);
    } else if (std::isfinite(lo)) {
      v = std::isfinite(v) ? std::max(v, lo + 1e-6 * std::max(1.0, std::abs(lo)))
                           : lo + 1.0;
    } else if (std::isfinite(hi)) {
      v = std::isfinite(v) ? std::min(v, hi - 1e-6 * std::max(1.0, std::abs(hi)))
                           : hi - 1.0;
    } else if (!std::isfinite(v)) {
      v = 0.0;
    }
    x[size_t(i)] = v;
  }
  return x;
}

Solution solve_staged(const Model& M0, const Model& M_p1base,
                      const Settings& st, std::span<const double> hint) {
  Solution sol;
  Model M = M0;
  M.prepare();

  // trusted interior hints go straight to the main stage
  if (st.hint_is_interior && int(hint.size()) == M.n) {
    Vec x0(hint.begin(), hint.end());
    if (in_domain(M, x0)) {
      StageOutcome om = run_barrier(M, x0, st, 1.0, st.t0,
                                    [](const Vec&) { return false; });
      sol.newton_iters += om.iters;
      sol.x = x0;
      sol.objective = M.objective(x0);
      if (om.numerical) {
        sol.status = Status::NumericalTrouble;
        sol.message = "main stage: factorization failed";
      } else if (!om.converged) {
        sol.status = Status::IterationLimit;
        sol.message = "main stage: Newton budget exhausted";
      } else {
        sol.status = Status::Optimal;
      }
      return sol;
    }
  }

  // ---- phase I
  int s_idx = -1;
  Model P1 = phase1_model(M_p1base, &s_idx);
  P1.prepare();
  Vec x1 = boxed_start(M, hint);
  const double s_need = required_slack(M, x1);
  Vec z(static_cast<size_t>(P1.n));
  std::copy(x1.begin(), x1.end(), z.begin());
  z[size_t(s_idx)] = std::max(1e-3, 1.1 * s_need + 1e-6);
  if (!in_domain(P1, z)) {
    // enlarge the slack until the relaxed domain opens up
    bool ok = false;
    for (int e = 0; e < 40; ++e) {
      z[size_t(s_idx)] *= 4.0;
      if (in_domain(P1, z)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      sol.status = Status::NumericalTrouble;
      sol.message = "phase I: no relaxed interior from the starting point";
      return sol;
    }
  }
  Settings st1 = st;
  st1.opt_tol = std::min(st.opt_tol, st.feas_tol) * 1e-2;
  auto p1_stop = [&](const Vec& xx) { return xx[size_t(s_idx)] < -1e-3; };
  StageOutcome o1 = run_barrier(P1, z, st1, 1.0, 1.0, p1_stop);
  sol.newton_iters += o1.iters;
  const double s_final = z[size_t(s_idx)];
  if (s_final >= 0.0) {
    sol.x.assign(z.begin(), z.begin() + M.n);  // for box diagnostics
    if (o1.converged && s_final > st.feas_tol) {
      sol.status = Status::Infeasible;
      sol.message = "phase I infeasibility certificate: slack " +
                    std::to_string(s_final);
    } else if (o1.converged) {
      sol.status = Status::NumericalTrouble;
      sol.message = "phase I: feasible set has no usable interior";
    } else {
      sol.status = o1.numerical ? Status::NumericalTrouble : Status::IterationLimit;
      sol.message = "phase I did not separate feasibility";
    }
    return sol;
  }

  // ---- main stage
  Vec x(static_cast<size_t>(M.n));
  std::copy(z.begin(), z.begin() + M.n, x.begin());
  StageOutcome o2 =
      run_barrier(M, x, st, 1.0, st.t0, [](const Vec&) { return false; });
  sol.newton_iters += o2.iters;
  sol.x = x;
  sol.objective = M.objective(x);
  if (o2.numerical) {
    sol.status = Status::NumericalTrouble;
    sol.message = "main stage: factorization failed";
  } else if (!o2.converged) {
    sol.status = Status::IterationLimit;
    sol.message = "main stage: Newton budget exhausted";
  } else {
    sol.status = Status::Optimal;
  }
  return sol;
}

// The barrier merit can be unbounded below along unbounded feasible
// directions (the -log terms run to -inf), so free variables get an
// artificial trust box that is enlarged and re-solved whenever it binds.
Solution solve_lowered(const Model& M0, const Settings& st,
                       std::span<const double> hint) {
  Model boxed = M0;
  Vec center = boxed_start(M0, hint);
  // coordinates with their own quadratic objective term cannot run away;
  // everything else gets the trust box
  std::vector<char> coercive(size_t(M0.n), 0);
  for (const auto& a : M0.obj_sq)
    if (a.idx.size() == 1 && a.coef[0] != 0.0) coercive[size_t(a.idx[0])] = 1;
  std::vector<char> artificial_lo(size_t(M0.n), 0), artificial_hi(size_t(M0.n), 0);
  Vec radius(size_t(M0.n), 0.0);
  for (int i = 0; i < M0.n; ++i) {
    radius[size_t(i)] = 1e4 * (1.0 + std::abs(center[size_t(i)]));
    if (coercive[size_t(i)]) continue;
    if (!std::isfinite(M0.lo[size_t(i)])) {
      boxed.lo[size_t(i)] = center[size_t(i)] - radius[size_t(i)];
      artificial_lo[size_t(i)] = 1;
    }
    if (!std::isfinite(M0.hi[size_t(i)])) {
      boxed.hi[size_t(i)] = center[size_t(i)] + radius[size_t(i)];
      artificial_hi[size_t(i)] = 1;
    }
  }
  // phase I lacks the objective's coercivity, so it gets the full box
  Model boxed_p1 = boxed;
  for (int i = 0; i < M0.n; ++i) {
    if (!coercive[size_t(i)]) continue;
    if (!std::isfinite(boxed_p1.lo[size_t(i)]))
      boxed_p1.lo[size_t(i)] = center[size_t(i)] - radius[size_t(i)];
    if (!std::isfinite(boxed_p1.hi[size_t(i)]))
      boxed_p1.hi[size_t(i)] = center[size_t(i)] + radius[size_t(i)];
  }
  Solution sol;
  for (int attempt = 0; attempt < 4; ++attempt) {
    sol = solve_staged(boxed, boxed_p1, st, hint);
    bool active = false;
    if (!sol.x.empty()) {
      for (int i = 0; i < M0.n && !active; ++i) {
        const double margin = 1e-5 * radius[size_t(i)];
        if (artificial_lo[size_t(i)] &&
            sol.x[size_t(i)] - boxed.lo[size_t(i)] < margin)
          active = true;
        if (artificial_hi[size_t(i)] &&
            boxed.hi[size_t(i)] - sol.x[size_t(i)] < margin)
          active = true;
      }
    }
    if (!active) return sol;
    for (int i = 0; i < M0.n; ++i) {
      radius[size_t(i)] *= 1e3;
      if (artificial_lo[size_t(i)])
        boxed.lo[size_t(i)] = center[size_t(i)] - radius[size_t(i)];
      if (artificial_hi[size_t(i)])
        boxed.hi[size_t(i)] = center[size_t(i)] + radius[size_t(i)];
      if (!std::isfinite(M0.lo[size_t(i)]))
        boxed_p1.lo[size_t(i)] = center[size_t(i)] - radius[size_t(i)];
      if (!std::isfinite(M0.hi[size_t(i)]))
        boxed_p1.hi[size_t(i)] = center[size_t(i)] + radius[size_t(i)];
    }
  }
  sol.status = Status::NumericalTrouble;
  sol.message = "trust box kept binding after enlargement";
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------

double Problem::objective_value(std::span<const double> x) const {
  double v = obj_linear.eval(x);
  for (const auto& a : obj_squares) {
    const double s = a.eval(x);
    v += s * s;
  }
  return v;
}

double Problem::max_violation(std::span<const double> x) const {
  double viol = 0.0;
  for (int i = 0; i < num_vars; ++i) {
    if (std::isfinite(lower[size_t(i)]))
      viol = std::max(viol, lower[size_t(i)] - x[size_t(i)]);
    if (std::isfinite(upper[size_t(i)]))
      viol = std::max(viol, x[size_t(i)] - upper[size_t(i)]);
  }
  for (const auto& c : lin) viol = std::max(viol, c.expr.eval(x));
  for (const auto& c : eq) viol = std::max(viol, std::abs(c.expr.eval(x)));
  for (const auto& c : quad) {
    double g = c.lin.eval(x);
    for (const auto& a : c.squares) {
      const double s = a.eval(x);
      g += s * s;
    }
    viol = std::max(viol, g);
  }
  for (const auto& c : soc) {
    double q = 0.0;
    for (const auto& a : c.rows) {
      const double s = a.eval(x);
      q += s * s;
    }
    viol = std::max(viol, std::sqrt(q) - c.rhs.eval(x));
  }
  for (const auto& c : expc) {
    const double u = c.arg.eval(x);
    viol = std::max(viol, std::exp(std::min(u, 300.0)) - c.bound.eval(x));
  }
  return viol;
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::IterationLimit: return "iteration_limit";
    case Status::NumericalTrouble: return "numerical_trouble";
  }
  return "?";
}

namespace {

void dump_affine(std::ostream& os, const Affine& a) {
  os << a.offset << ' ' << a.idx.size();
  for (size_t j = 0; j < a.idx.size(); ++j)
    os << ' ' << a.idx[j] << ':' << a.coef[j];
  os << '\n';
}

}  // namespace

void Problem::dump(std::ostream& os) const {
  os << "conic_problem v1\n";
  os << "vars " << num_vars << '\n';
  for (int i = 0; i < num_vars; ++i)
    if (std::isfinite(lower[size_t(i)]) || std::isfinite(upper[size_t(i)]))
      os << "bound " << i << ' ' << lower[size_t(i)] << ' ' << upper[size_t(i)]
         << '\n';
  os << "obj_lin ";
  dump_affine(os, obj_linear);
  for (const auto& a : obj_squares) {
    os << "obj_sq ";
    dump_affine(os, a);
  }
  for (const auto& c : lin) {
    os << "lin ";
    dump_affine(os, c.expr);
  }
  for (const auto& c : eq) {
    os << "eq ";
    dump_affine(os, c.expr);
  }
  for (const auto& c : quad) {
    os << "quad " << c.squares.size() << '\n';
    for (const auto& a : c.squares) {
      os << "  sq ";
      dump_affine(os, a);
    }
    os << "  lin ";
    dump_affine(os, c.lin);
  }
  for (const auto& c : soc) {
    os << "soc " << c.rows.size() << '\n';
    for (const auto& a : c.rows) {
      os << "  row ";
      dump_affine(os, a);
    }
    os << "  rhs ";
    dump_affine(os, c.rhs);
  }
  for (const auto& c : expc) {
    os << "exp\n  arg ";
    dump_affine(os, c.arg);
    os << "  bound ";
    dump_affine(os, c.bound);
  }
}

namespace {

// compose an affine functional with x = xp + N z
Affine compose(const Affine& a, const Vec& xp, const Mat& N) {
  Affine out;
  out.offset = a.offset;
  if (a.idx.empty()) return out;
  Vec dense(size_t(N.cols), 0.0);
  for (size_t j = 0; j < a.idx.size(); ++j) {
    const int i = a.idx[j];
    out.offset += a.coef[j] * xp[size_t(i)];
    for (int c = 0; c < N.cols; ++c) dense[size_t(c)] += a.coef[j] * N(i, c);
  }
  for (int c = 0; c < N.cols; ++c)
    if (dense[size_t(c)] != 0.0) out.add(c, dense[size_t(c)]);
  return out;
}

}  // namespace

Solution solve(const Problem& p, const Settings& st,
               std::span<const double> hint) {
  // fallback route: exponential constraints as iterated tangent cuts
  if (st.exp_outer_linearization && !p.expc.empty()) {
    Problem relaxed = p;
    relaxed.expc.clear();
    Settings inner = st;
    inner.exp_outer_linearization = false;
    // initial tangents per constraint around the hint
    std::vector<std::vector<double>> cuts(p.expc.size());
    for (size_t i = 0; i < p.expc.size(); ++i) {
      double u0 = hint.empty() ? 0.0 : p.expc[i].arg.eval(hint);
      if (!std::isfinite(u0)) u0 = 0.0;
      u0 = std::clamp(u0, -50.0, 50.0);
      cuts[i] = {u0 - 2.0, u0, u0 + 2.0};
    }
    Solution best;
    std::vector<double> h(hint.begin(), hint.end());
    for (int round = 0; round < 40; ++round) {
      Problem cur = relaxed;
      for (size_t i = 0; i < p.expc.size(); ++i) {
        for (double u0 : cuts[i]) {
          // tangent cut: exp(u0) (1 + u - u0) - v <= 0; the tangent
          // under-approximates exp, so every cut is a valid relaxation
          LinearConstraint lc;
          const double e0 = std::exp(u0);
          lc.expr = p.expc[i].arg;
          for (auto& c : lc.expr.coef) c *= e0;
          lc.expr.offset = e0 * (1.0 - u0 + p.expc[i].arg.offset) -
                           p.expc[i].bound.offset;
          for (size_t j = 0; j < p.expc[i].bound.idx.size(); ++j)
            lc.expr.add(p.expc[i].bound.idx[j], -p.expc[i].bound.coef[j]);
          cur.lin.push_back(std::move(lc));
        }
      }
      Solution s = solve(cur, inner, h);
      if (s.status != Status::Optimal) {
        // an unbounded or struggling relaxation still localizes where the
        // exp terms are violated; cut there and retry
        if (!s.x.empty() && s.status != Status::Infeasible) {
          for (size_t i = 0; i < p.expc.size(); ++i)
            cuts[i].push_back(
                std::clamp(p.expc[i].arg.eval(s.x), -50.0, 50.0));
          h = s.x;
          best = std::move(s);
          continue;
        }
        s.message = "exp outer linearization round " + std::to_string(round) +
                    ": " + s.message;
        return s;
      }
      double worst = 0.0;
      for (size_t i = 0; i < p.expc.size(); ++i) {
        const double u = p.expc[i].arg.eval(s.x);
        const double v = p.expc[i].bound.eval(s.x);
        const double viol = std::exp(std::min(u, 300.0)) - v;
        if (viol > worst) worst = viol;
        if (viol > st.feas_tol) cuts[i].push_back(u);
      }
      if (worst <= st.feas_tol) {
        s.objective = p.objective_value(s.x);
        s.max_violation = p.max_violation(s.x);
        return s;
      }
      h = s.x;
      best = std::move(s);
    }
    best.status = Status::IterationLimit;
    best.message = "exp outer linearization did not close the gap";
    return best;
  }

  // equality elimination via an orthonormal null-space basis
  if (!p.eq.empty()) {
    const int pn = int(p.eq.size());
    Mat E(pn, p.num_vars);
    Vec d(size_t(pn), 0.0);
    for (int r = 0; r < pn; ++r) {
      for (size_t j = 0; j < p.eq[size_t(r)].expr.idx.size(); ++j)
        E(r, p.eq[size_t(r)].expr.idx[j]) += p.eq[size_t(r)].expr.coef[j];
      d[size_t(r)] = -p.eq[size_t(r)].expr.offset;
    }
    Mat N;
    Vec xp;
    if (!nullspace_particular(E, d, N, xp)) {
      Solution sol;
      sol.status = Status::NumericalTrouble;
      sol.message = "equality constraints are rank deficient";
      return sol;
    }
    Problem q;
    q.num_vars = N.cols;
    q.lower.assign(size_t(N.cols), -kInf);
    q.upper.assign(size_t(N.cols), kInf);
    for (const auto& a : p.obj_squares) q.obj_squares.push_back(compose(a, xp, N));
    q.obj_linear = compose(p.obj_linear, xp, N);
    for (const auto& c : p.lin) q.lin.push_back({compose(c.expr, xp, N)});
    for (const auto& c : p.quad) {
      QuadConstraint qc;
      for (const auto& a : c.squares) qc.squares.push_back(compose(a, xp, N));
      qc.lin = compose(c.lin, xp, N);
      q.quad.push_back(std::move(qc));
    }
    for (const auto& c : p.soc) {
      SocConstraint sc;
      for (const auto& a : c.rows) sc.rows.push_back(compose(a, xp, N));
      sc.rhs = compose(c.rhs, xp, N);
      q.soc.push_back(std::move(sc));
    }
    for (const auto& c : p.expc)
      q.expc.push_back({compose(c.arg, xp, N), compose(c.bound, xp, N)});
    for (int i = 0; i < p.num_vars; ++i) {
      if (std::isfinite(p.lower[size_t(i)])) {
        Affine a;  // lower - x_i <= 0 in z space
        a.offset = p.lower[size_t(i)] - xp[size_t(i)];
        for (int c = 0; c < N.cols; ++c)
          if (N(i, c) != 0.0) a.add(c, -N(i, c));
        q.lin.push_back({std::move(a)});
      }
      if (std::isfinite(p.upper[size_t(i)])) {
        Affine a;  // x_i - upper <= 0
        a.offset = xp[size_t(i)] - p.upper[size_t(i)];
        for (int c = 0; c < N.cols; ++c)
          if (N(i, c) != 0.0) a.add(c, N(i, c));
        q.lin.push_back({std::move(a)});
      }
    }
    Vec zh;
    if (!hint.empty()) {
      zh.assign(size_t(N.cols), 0.0);
      for (int c = 0; c < N.cols; ++c) {
        double acc = 0.0;
        for (int i = 0; i < p.num_vars; ++i)
          acc += N(i, c) * (hint[size_t(i)] - xp[size_t(i)]);
        zh[size_t(c)] = acc;
      }
    }
    Solution sz = solve(q, st, zh);
    Solution sol = sz;
    if (!sz.x.empty()) {
      sol.x.assign(size_t(p.num_vars), 0.0);
      for (int i = 0; i < p.num_vars; ++i) {
        double acc = xp[size_t(i)];
        for (int c = 0; c < N.cols; ++c) acc += N(i, c) * sz.x[size_t(c)];
        sol.x[size_t(i)] = acc;
      }
      sol.objective = p.objective_value(sol.x);
      sol.max_violation = p.max_violation(sol.x);
    }
    return sol;
  }

  Model M = lower(p);
  Solution sol = solve_lowered(M, st, hint);
  if (!sol.x.empty()) sol.max_violation = p.max_violation(sol.x);
  return sol;
}

}  // namespace cscn::conic
