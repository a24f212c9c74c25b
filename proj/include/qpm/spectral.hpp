// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpm/medium.hpp"

namespace qpm {

// Which eigenbasis P₁ was used; the similarity matrix A = P₁P₂P₁ᵀ depends on it.
enum class Basis {
  sqrt_kappa,       // eigenvectors of √𝒦, μ_k its eigenvalues
  symmetric_kappa,  // real orthonormal eigenvectors of a real symmetric 𝒦, μ_k = principal √λ_k
  user              // supplied by the caller
};

inline const char* basis_name(Basis b) {
  switch (b) {
    case Basis::sqrt_kappa: return "sqrt_kappa_eigenbasis";
    case Basis::symmetric_kappa: return "symmetric_kappa_orthonormal";
    case Basis::user: return "user_supplied";
  }
  return "unknown";
}

struct SpectralOptions {
  double defective_threshold = 1e8;
  double singular_similarity_threshold = 1e12;
  bool throw_if_defective = true;
};

struct EigenSystem {
  Vec values;           // μ_k
  Mat right_vectors;    // P₁
  Mat inverse_vectors;  // P₁⁻¹
  double cond = 1.0;
  bool defective = false;
  Basis basis = Basis::sqrt_kappa;

  Eigen::Index size() const { return values.size(); }
  Vec lambda() const { return values.cwiseProduct(values); }
};

struct ExtendedOperator {
  Eigen::Index n = 0;
  Mat damping;  // Γ, kept for the auxiliary response
  Mat kappa;
  Mat sqrt_kappa;
  Mat sim_A;
  Mat sim_A_inv;
  Mat A1, A2, A3;
  Mat gen_JB;
  double cond_A = 0.0;
  Basis gauge = Basis::sqrt_kappa;

  bool has_similarity() const { return sim_A.size() > 0; }
  Eigen::Index N() const { return 2 * n; }
};

// 𝒦 and √𝒦 = i[[0, −I], [K, 2Γ]].
inline ExtendedOperator build_sqrt_kappa(const MediumSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n;
  ExtendedOperator ext;
  ext.n = n;
  ext.damping = spec.damping;
  ext.kappa = extended_kappa(spec.kernel, spec.damping);
  Mat s = Mat::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n) = -Mat::Identity(n, n);
  s.bottomLeftCorner(n, n) = spec.kernel;
  s.bottomRightCorner(n, n) = 2.0 * spec.damping;
  ext.sqrt_kappa = I_unit * s;
  return ext;
}

inline double sqrt_identity_residual(const ExtendedOperator& ext) {
  const double scale = std::max(ext.kappa.norm(), 1e-300);
  return (ext.sqrt_kappa * ext.sqrt_kappa - ext.kappa).norm() / scale;
}

inline EigenSystem eigensystem_from_vectors(const Vec& values, const Mat& P1, Basis basis = Basis::user,
                                            const SpectralOptions& opt = {}) {
  EigenSystem e;
  e.values = values;
  e.right_vectors = P1;
  Eigen::PartialPivLU<Mat> lu(P1);
  e.inverse_vectors = lu.inverse();
  e.cond = linalg::norm1(P1) * linalg::norm1(e.inverse_vectors);
  if (!std::isfinite(e.cond)) e.cond = std::numeric_limits<double>::infinity();
  e.defective = e.cond > opt.defective_threshold;
  e.basis = basis;
  return e;
}

inline EigenSystem eigendecompose(const ExtendedOperator& ext, const SpectralOptions& opt = {}) {
  auto d = linalg::eig_sorted(ext.sqrt_kappa);
  EigenSystem e;
  e.values = std::move(d.values);
  e.right_vectors = std::move(d.vectors);
  e.inverse_vectors = std::move(d.inverse);
  e.cond = d.cond;
  e.defective = e.cond > opt.defective_threshold;
  e.basis = Basis::sqrt_kappa;
  if (e.defective && opt.throw_if_defective)
    throw DefectiveMatrix("eigenvector condition number " + std::to_string(e.cond) + " exceeds threshold");
  return e;
}

inline bool is_real_symmetric(const Mat& m, double tol = 1e-14) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return m.imag().cwiseAbs().maxCoeff() <= tol * scale &&
         (m.real() - m.real().transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Hermitian limit (Γ = 0, K = Kᵀ real): orthonormal eigenbasis of 𝒦, giving A = I.
inline EigenSystem eigendecompose_symmetric(const ExtendedOperator& ext) {
  if (!is_real_symmetric(ext.kappa)) throw NotHermitianLimit("extended kernel is not real symmetric");
  const RMat k = 0.5 * (ext.kappa.real() + ext.kappa.real().transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(k);
  const Eigen::Index N = k.rows();
  EigenSystem e;
  e.values.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) e.values(i) = std::sqrt(cd(es.eigenvalues()(i), 0.0));
  e.right_vectors = es.eigenvectors().cast<cd>();
  e.inverse_vectors = es.eigenvectors().transpose().cast<cd>();
  e.cond = 1.0;
  e.defective = false;
  e.basis = Basis::symmetric_kappa;
  return e;
}

// Block-diagonal anti-identity (exchange) matrix.
inline Mat exchange_matrix(const std::vector<int>& blocks) {
  Eigen::Index total = 0;
  for (int b : blocks) {
    if (b <= 0) throw InvalidSpec("Jordan block sizes must be positive");
    total += b;
  }
  Mat p = Mat::Zero(total, total);
  Eigen::Index off = 0;
  for (int b : blocks) {
    for (int i = 0; i < b; ++i) p(off + i, off + b - 1 - i) = 1.0;
    off += b;
  }
  return p;
}

// A = P₁P₂P₁ᵀ, symmetrized.
inline Mat build_similarity(const EigenSystem& eig, const std::optional<std::vector<int>>& jordan_blocks = {},
                            const SpectralOptions& opt = {}) {
  const Mat& P = eig.right_vectors;
  Mat A;
  if (jordan_blocks) {
    const Mat P2 = exchange_matrix(*jordan_blocks);
    if (P2.rows() != P.rows()) throw InvalidSpec("Jordan block sizes must sum to the matrix order");
    A = P * P2 * P.transpose();
  } else {
    if (eig.defective)
      throw DefectiveMatrix("eigenvector condition number " + std::to_string(eig.cond) + " exceeds threshold");
    A = P * P.transpose();
  }
  A = (0.5 * (A + A.transpose())).eval();
  Eigen::PartialPivLU<Mat> lu(A);
  const double condA = linalg::norm1(A) * linalg::norm1(lu.inverse());
  if (!(condA <= opt.singular_similarity_threshold))
    throw SingularSimilarity("cond(A) = " + std::to_string(condA));
  return A;
}

// J𝓑 = [[0, A⁻¹𝒦], [−A, 0]]
inline Mat build_JB(const ExtendedOperator& ext) {
  if (!ext.has_similarity()) throw SingularSimilarity("similarity matrix not built");
  const Eigen::Index N = ext.N();
  Mat jb = Mat::Zero(2 * N, 2 * N);
  jb.topRightCorner(N, N) = ext.sim_A_inv * ext.kappa;
  jb.bottomLeftCorner(N, N) = -ext.sim_A;
  return jb;
}

inline void attach_similarity(ExtendedOperator& ext, const Mat& A, Basis gauge) {
  const Eigen::Index n = ext.n;
  ext.sim_A = A;
  Eigen::PartialPivLU<Mat> lu(A);
  ext.sim_A_inv = lu.inverse();
  ext.cond_A = linalg::norm1(A) * linalg::norm1(ext.sim_A_inv);
  ext.A1 = A.topLeftCorner(n, n);
  ext.A2 = A.topRightCorner(n, n);
  ext.A3 = A.bottomRightCorner(n, n);
  ext.gauge = gauge;
  ext.gen_JB = build_JB(ext);
}

// H₀ = ½πᵀAπ + ½xᵀA⁻¹𝒦x at π = iA⁻¹√𝒦x.
inline cd on_shell_energy(const ExtendedOperator& ext, const Vec& x) {
  const Vec pi = I_unit * (ext.sim_A_inv * (ext.sqrt_kappa * x));
  const cd kin = (pi.transpose() * (ext.sim_A * pi))(0);
  const cd pot = (x.transpose() * (ext.sim_A_inv * (ext.kappa * x)))(0);
  return 0.5 * kin + 0.5 * pot;
}

// Relative residual ‖A𝒦ᵀA⁻¹ − 𝒦‖/‖𝒦‖.
inline double similarity_residual(const ExtendedOperator& ext) {
  return (ext.sim_A * ext.kappa.transpose() * ext.sim_A_inv - ext.kappa).norm() / ext.kappa.norm();
}

struct Prepared {
  ExtendedOperator ext;
  EigenSystem eig;
};

// 𝒦, √𝒦, eigenbasis, A and J𝓑 in one go.
inline Prepared prepare(const MediumSpec& spec, Basis gauge = Basis::sqrt_kappa, const SpectralOptions& opt = {}) {
  Prepared p;
  p.ext = build_sqrt_kappa(spec);
  p.eig = gauge == Basis::symmetric_kappa ? eigendecompose_symmetric(p.ext) : eigendecompose(p.ext, opt);
  attach_similarity(p.ext, build_similarity(p.eig, {}, opt), p.eig.basis);
  return p;
}

}  // namespace qpm
