#pragma once

#include <cassert>
#include <complex>
#include <vector>

#include "cscn/kernels.hpp"

namespace cscn {

using cd = std::complex<double>;
using Vec = std::vector<double>;
using CVec = std::vector<cd>;

// Dense row-major matrix, sized for the small systems in this project
// (a few hundred rows at most).
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(size_t(r) * c, fill) {}

  double& operator()(int r, int c) { return a[size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return a[size_t(r) * cols + c]; }
  double* row(int r) { return a.data() + size_t(r) * cols; }
  const double* row(int r) const { return a.data() + size_t(r) * cols; }
};

struct CMat {
  int rows = 0, cols = 0;
  CVec a;

  CMat() = default;
  CMat(int r, int c) : rows(r), cols(c), a(size_t(r) * c) {}

  cd& operator()(int r, int c) { return a[size_t(r) * cols + c]; }
  cd operator()(int r, int c) const { return a[size_t(r) * cols + c]; }
  const cd* row(int r) const { return a.data() + size_t(r) * cols; }
};

// In-place Cholesky of the lower triangle of the symmetric matrix A
// (upper triangle ignored). Returns false if a pivot drops below eps.
bool llt_factor(Mat& A, double eps = 0.0);

// Solves L L^T x = b with the factor from llt_factor; b is overwritten.
void llt_solve(const Mat& L, Vec& b);

// y = A^H x for row-major complex A (rows x cols), x of length rows.
CVec cmat_hermitian_apply(const CMat& A, const CVec& x);

// Dominant left singular vector of A (unit norm), via power iteration on
// A A^H from a fixed deterministic start.
CVec dominant_left_singular_vector(const CMat& A, int iters = 50);

// Orthonormal basis of the null space of E (p x n, p < n) plus a particular
// solution of E x = d, both via Householder QR of E^T. Returns false if E
// is rank deficient.
bool nullspace_particular(const Mat& E, const Vec& d, Mat& basis_out, Vec& xp_out);

}  // namespace cscn
