#pragma once

// Test-only dense two-phase simplex with Bland's rule. Used as the
// independent vertex-walking oracle for the cache-update linear programs;
// intentionally shares nothing with the interior-point path under test.

#include <cmath>
#include <limits>
#include <vector>

#include "cscn/linalg.hpp"

namespace cscn::testlp {

struct LpResult {
  bool ok = false;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
};

// min c^T x  s.t.  A x <= b,  x >= 0
inline LpResult simplex_solve(Mat A, Vec b, Vec c) {
  const int m = A.rows, n = A.cols;
  // canonical rows with slacks; negative right-hand sides get artificials
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b[size_t(i)] < 0.0) {
      for (int j = 0; j < n; ++j) A(i, j) = -A(i, j);
      b[size_t(i)] = -b[size_t(i)];
      art_rows.push_back(i);
    }
  const int n_art = int(art_rows.size());
  const int total = n + m + n_art;  // x, slacks, artificials
  Mat T(m + 1, total + 1, 0.0);     // last row: phase objective
  std::vector<int> basis(size_t(m), -1);
  std::vector<char> slack_negated(size_t(m), 0);
  for (int i : art_rows) slack_negated[size_t(i)] = 1;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T(i, j) = A(i, j);
    T(i, n + i) = slack_negated[size_t(i)] ? -1.0 : 1.0;
    T(i, total) = b[size_t(i)];
    basis[size_t(i)] = n + i;
  }
  for (int k = 0; k < n_art; ++k) {
    T(art_rows[size_t(k)], n + m + k) = 1.0;
    basis[size_t(art_rows[size_t(k)])] = n + m + k;
  }

  auto pivot = [&](int pr, int pc) {
    const double piv = T(pr, pc);
    for (int j = 0; j <= total; ++j) T(pr, j) /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = T(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j <= total; ++j) T(i, j) -= f * T(pr, j);
    }
    basis[size_t(pr)] = pc;
  };

  auto run_phase = [&](int allowed_cols) -> bool {
    for (int iter = 0; iter < 20000; ++iter) {
      int pc = -1;  // Bland: smallest index with negative reduced cost
      for (int j = 0; j < allowed_cols; ++j)
        if (T(m, j) < -1e-11) {
          pc = j;
          break;
        }
      if (pc < 0) return true;  // optimal
      int pr = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, pc) <= 1e-11) continue;
        const double ratio = T(i, total) / T(i, pc);
        if (ratio < best - 1e-12) {
          best = ratio;
          pr = i;
        } else if (ratio <= best + 1e-12 && pr >= 0 &&
                   basis[size_t(i)] < basis[size_t(pr)]) {
          pr = i;  // Bland tie-break on the leaving variable
        }
      }
      if (pr < 0) return false;  // unbounded
      pivot(pr, pc);
    }
    return false;
  };

  LpResult res;
  if (n_art > 0) {
    // phase 1: minimize the artificial sum
    for (int k = 0; k < n_art; ++k) T(m, n + m + k) = 1.0;
    for (int i : art_rows)
      for (int j = 0; j <= total; ++j) T(m, j) -= T(i, j);
    if (!run_phase(total)) return res;
    if (T(m, total) < -1e-8) return res;  // infeasible
    // drive leftover artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
      if (basis[size_t(i)] < n + m) continue;
      for (int j = 0; j < n + m; ++j)
        if (std::abs(T(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
    }
  }
  // phase 2
  for (int j = 0; j <= total; ++j) T(m, j) = 0.0;
  for (int j = 0; j < n; ++j) T(m, j) = c[size_t(j)];
  for (int i = 0; i < m; ++i) {
    if (basis[size_t(i)] >= n) continue;
    const double f = T(m, basis[size_t(i)]);
    if (f == 0.0) continue;
    for (int j = 0; j <= total; ++j) T(m, j) -= f * T(i, j);
  }
  if (!run_phase(n + m)) return res;
  res.ok = true;
  res.x.assign(size_t(n), 0.0);
  for (int i = 0; i < m; ++i)
    if (basis[size_t(i)] < n) res.x[size_t(basis[size_t(i)])] = T(i, total);
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += c[size_t(j)] * res.x[size_t(j)];
  return res;
}

// vertex oracle for the cache-update objective:
//   min sum_r y_r : y_r >= w_{r,b} (1 - l_{f_r,b}),  sum_f s_f l_{f,b} <= S,
//   0 <= l <= 1
struct FloorBranch {
  int content;
  int sbs;
  double weight;
};

inline LpResult floor_lp_oracle(int num_contents, int num_sbs,
                                const std::vector<double>& sizes, double budget,
                                const std::vector<std::vector<FloorBranch>>& terms) {
  const int nl = num_contents * num_sbs;
  const int ny = int(terms.size());
  const int n = nl + ny;
  std::vector<Vec> rows;
  Vec rhs;
  auto l_var = [&](int f, int b) { return f * num_sbs + b; };
  for (int r = 0; r < ny; ++r)
    for (const auto& br : terms[size_t(r)]) {
      Vec row(size_t(n), 0.0);
      row[size_t(l_var(br.content, br.sbs))] = -br.weight;
      row[size_t(nl + r)] = -1.0;
      rows.push_back(std::move(row));
      rhs.push_back(-br.weight);  // w - w l - y <= 0
    }
  for (int b = 0; b < num_sbs; ++b) {
    Vec row(size_t(n), 0.0);
    for (int f = 0; f < num_contents; ++f)
      row[size_t(l_var(f, b))] = sizes[size_t(f)];
    rows.push_back(std::move(row));
    rhs.push_back(budget);
  }
  for (int v = 0; v < nl; ++v) {
    Vec row(size_t(n), 0.0);
    row[size_t(v)] = 1.0;
    rows.push_back(std::move(row));
    rhs.push_back(1.0);
  }
  Mat A(int(rows.size()), n);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < n; ++j) A(int(i), j) = rows[i][size_t(j)];
  Vec c(size_t(n), 0.0);
  for (int r = 0; r < ny; ++r) c[size_t(nl + r)] = 1.0;
  return simplex_solve(std::move(A), std::move(rhs), std::move(c));
}

}  // namespace cscn::testlp
