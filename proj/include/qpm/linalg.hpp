// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "qpm/error.hpp"

namespace qpm {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cd I_unit{0.0, 1.0};

namespace linalg {

// Dense eigendecomposition with eigenvalues in (Re, Im) lexicographic order.
struct Eig {
  Vec values;
  Mat vectors;
  Mat inverse;
  double cond = 0.0;
};

inline double norm1(const Mat& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

inline bool lex_less(cd a, cd b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// zgeev: balancing plus Hessenberg QR.
inline void geev(Mat a, Vec& w, Mat& vr) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  vr.resize(n, n);
  if (n == 0) return;
  cd dummy;
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(), &dummy, 1,
                                  vr.data(), n);
  if (info != 0) throw DefectiveMatrix("zgeev failed to converge (info=" + std::to_string(info) + ")");
}

// LU factorization (zgetrf) with a reciprocal 1-norm condition estimate (zgecon).
class DenseLU {
 public:
  explicit DenseLU(Mat a) : lu_(std::move(a)), piv_(static_cast<std::size_t>(lu_.rows())) {
    const lapack_int n = static_cast<lapack_int>(lu_.rows());
    if (n == 0) return;
    const double anorm = norm1(lu_);
    const lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, piv_.data());
    if (info > 0) return;
    double rc = 0.0;
    if (LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, lu_.data(), n, anorm, &rc) == 0 && std::isfinite(rc)) rcond_ = rc;
  }

  double rcond() const { return rcond_; }

  Mat solve(Mat b) const {
    const lapack_int n = static_cast<lapack_int>(lu_.rows());
    if (n == 0) return b;
    LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<lapack_int>(b.cols()), lu_.data(), n, piv_.data(),
                   b.data(), n);
    return b;
  }

  Mat inverse() const {
    Mat inv = lu_;
    const lapack_int n = static_cast<lapack_int>(lu_.rows());
    if (n == 0) return inv;
    std::vector<lapack_int> piv = piv_;
    LAPACKE_zgetri(LAPACK_COL_MAJOR, n, inv.data(), n, piv.data());
    return inv;
  }

 private:
  Mat lu_;
  std::vector<lapack_int> piv_;
  double rcond_ = 0.0;
};

inline Eig eig_sorted(const Mat& m) {
  Vec w;
  Mat v;
  geev(m, w, v);
  const Eigen::Index n = w.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return lex_less(w(a), w(b)); });
  Eig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = w(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  const DenseLU lu(out.vectors);
  out.inverse = lu.rcond() > 0.0 ? lu.inverse() : Mat::Constant(n, n, cd(std::numeric_limits<double>::infinity()));
  out.cond = norm1(out.vectors) * norm1(out.inverse);
  if (!std::isfinite(out.cond)) out.cond = std::numeric_limits<double>::infinity();
  return out;
}

// V f(diag) V^-1
template <class F>
Mat function_of(const Eig& e, F&& f) {
  Vec d(e.values.size());
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = f(e.values(k));
  return e.vectors * d.asDiagonal() * e.inverse;
}

inline double rcond_of(const Eigen::PartialPivLU<Mat>& lu) { return lu.rcond(); }

inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace linalg
}  // namespace qpm
