#include "cscn/linalg.hpp"

#include <cmath>

namespace cscn {

namespace k = cscn::kernels;

bool llt_factor(Mat& A, double eps) {
  assert(A.rows == A.cols);
  const int n = A.rows;
  for (int j = 0; j < n; ++j) {
    double* colj = A.row(j);
    double d = A(j, j) - k::sumsq(colj, size_t(j));
    if (d <= eps) return false;
    d = std::sqrt(d);
    A(j, j) = d;
    const double inv = 1.0 / d;
    for (int i = j + 1; i < n; ++i) {
      double v = A(i, j) - k::dot(A.row(i), colj, size_t(j));
      A(i, j) = v * inv;
    }
  }
  return true;
}

void llt_solve(const Mat& L, Vec& b) {
  const int n = L.rows;
  for (int i = 0; i < n; ++i)
    b[i] = (b[i] - k::dot(L.row(i), b.data(), size_t(i))) / L(i, i);
  for (int i = n - 1; i >= 0; --i) {
    const double v = b[i] / L(i, i);
    b[i] = v;
    // b[0..i-1] -= v * column i of L, i.e. row i of L^T
    if (i > 0) k::axpy(-v, L.row(i), b.data(), size_t(i));
  }
}

CVec cmat_hermitian_apply(const CMat& A, const CVec& x) {
  assert(int(x.size()) == A.rows);
  CVec y(A.cols, cd{0.0, 0.0});
  for (int r = 0; r < A.rows; ++r) {
    const cd xr = x[size_t(r)];
    const cd* arow = A.row(r);
    for (int c = 0; c < A.cols; ++c) y[size_t(c)] += std::conj(arow[c]) * xr;
  }
  return y;
}

CVec dominant_left_singular_vector(const CMat& A, int iters) {
  const int n = A.rows;
  CVec v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[size_t(i)] = cd(1.0 + 0.1 * i, 0.3 * (i % 3));
  for (int it = 0; it < iters; ++it) {
    // u = A^H v;  v = A u
    CVec u = cmat_hermitian_apply(A, v);
    CVec w(size_t(n), cd{0.0, 0.0});
    for (int r = 0; r < n; ++r) {
      const cd* arow = A.row(r);
      cd acc{0.0, 0.0};
      for (int c = 0; c < A.cols; ++c) acc += arow[c] * u[size_t(c)];
      w[size_t(r)] = acc;
    }
    double nrm = std::sqrt(k::cnormsq(w.data(), w.size()));
    if (nrm <= 0.0) break;
    for (auto& e : w) e /= nrm;
    v = std::move(w);
  }
  double nrm = std::sqrt(k::cnormsq(v.data(), v.size()));
  if (nrm > 0.0)
    for (auto& e : v) e /= nrm;
  return v;
}

bool nullspace_particular(const Mat& E, const Vec& d, Mat& basis_out, Vec& xp_out) {
  const int p = E.rows, n = E.cols;
  assert(p < n && int(d.size()) == p);
  // Householder QR of E^T (n x p): E^T = Q R.
  Mat At(n, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) At(j, i) = E(i, j);
  std::vector<Vec> house;
  for (int kcol = 0; kcol < p; ++kcol) {
    double nrm2 = 0.0;
    for (int i = kcol; i < n; ++i) nrm2 += At(i, kcol) * At(i, kcol);
    double alpha = std::sqrt(nrm2);
    if (alpha < 1e-14) return false;  // rank deficient
    if (At(kcol, kcol) > 0) alpha = -alpha;
    Vec v(size_t(n), 0.0);
    for (int i = kcol; i < n; ++i) v[size_t(i)] = At(i, kcol);
    v[size_t(kcol)] -= alpha;
    double vnorm2 = k::sumsq(v.data() + kcol, size_t(n - kcol));
    if (vnorm2 < 1e-28) return false;
    // apply reflector to remaining columns
    for (int c = kcol; c < p; ++c) {
      double proj = 0.0;
      for (int i = kcol; i < n; ++i) proj += v[size_t(i)] * At(i, c);
      proj *= 2.0 / vnorm2;
      for (int i = kcol; i < n; ++i) At(i, c) -= proj * v[size_t(i)];
    }
    house.push_back(std::move(v));
  }
  // Solve R^T y = d (R is p x p upper triangular, stored in At's top block).
  Vec y(size_t(p), 0.0);
  for (int i = 0; i < p; ++i) {
    double acc = d[size_t(i)];
    for (int j = 0; j < i; ++j) acc -= At(j, i) * y[size_t(j)];
    if (std::abs(At(i, i)) < 1e-14) return false;
    y[size_t(i)] = acc / At(i, i);
  }
  // xp = Q1 y; columns of Q via reflectors applied to unit vectors.
  auto apply_q = [&](Vec& w) {
    for (int kcol = p - 1; kcol >= 0; --kcol) {
      const Vec& v = house[size_t(kcol)];
      double vnorm2 = k::sumsq(v.data() + kcol, size_t(n - kcol));
      double proj = 0.0;
      for (int i = kcol; i < n; ++i) proj += v[size_t(i)] * w[size_t(i)];
      proj *= 2.0 / vnorm2;
      for (int i = kcol; i < n; ++i) w[size_t(i)] -= proj * v[size_t(i)];
    }
  };
  xp_out.assign(size_t(n), 0.0);
  for (int i = 0; i < p; ++i) xp_out[size_t(i)] = y[size_t(i)];
  apply_q(xp_out);
  basis_out = Mat(n, n - p);
  for (int c = 0; c < n - p; ++c) {
    Vec w(size_t(n), 0.0);
    w[size_t(p + c)] = 1.0;
    apply_q(w);
    for (int i = 0; i < n; ++i) basis_out(i, c) = w[size_t(i)];
  }
  return true;
}

}  // namespace cscn
