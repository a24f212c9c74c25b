// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>

#include "qpm/constants.hpp"
#include "qpm/spectral.hpp"

namespace qpm {

// Rows are linear forms in (x, π): columns [0, N) act on x, [N, 2N) on π.
struct PseudoBosonBasis {
  Mat b_coeff;
  Mat btilde_coeff;
  Vec sqrtJK;     // μ_k
  Vec quarterJK;  // principal √μ_k
  double hbar = 1.0;
};

// b = (J^{1/4}P⁻¹x + iJ^{−1/4}Pᵀπ)/√(2ħ), b̃ the same with −i.
inline PseudoBosonBasis build_pseudoboson(const EigenSystem& eig, double hbar) {
  if (eig.defective) throw DefectiveMatrix("pseudo-boson basis requires a diagonalizable kernel");
  const Eigen::Index N = eig.size();
  for (Eigen::Index k = 0; k < N; ++k)
    if (std::abs(eig.values(k)) < 1e-12) throw ZeroMode("mode " + std::to_string(k) + " has zero frequency");
  PseudoBosonBasis b;
  b.hbar = hbar;
  b.sqrtJK = eig.values;
  b.quarterJK = eig.values.unaryExpr([](cd m) { return std::sqrt(m); });
  const double pre = 1.0 / std::sqrt(2.0 * hbar);
  const Mat xpart = pre * (b.quarterJK.asDiagonal() * eig.inverse_vectors);
  const Mat ppart = pre * (b.quarterJK.cwiseInverse().asDiagonal() * eig.right_vectors.transpose());
  b.b_coeff.resize(N, 2 * N);
  b.btilde_coeff.resize(N, 2 * N);
  b.b_coeff << xpart, I_unit * ppart;
  b.btilde_coeff << xpart, -I_unit * ppart;
  return b;
}

// [u_i, w_j] from [x_a, π_b] = iħδ_ab.
inline Mat commutator_matrix(const Mat& u, const Mat& w, double hbar) {
  const Eigen::Index N = u.cols() / 2;
  return I_unit * hbar *
         (u.leftCols(N) * w.rightCols(N).transpose() - u.rightCols(N) * w.leftCols(N).transpose());
}

// Column rescaling P → P diag(d) (another admissible gauge for A).
inline EigenSystem rescale_columns(const EigenSystem& eig, const Vec& d) {
  EigenSystem out = eig;
  out.right_vectors = eig.right_vectors * d.asDiagonal();
  out.inverse_vectors = d.cwiseInverse().asDiagonal() * eig.inverse_vectors;
  out.cond = linalg::norm1(out.right_vectors) * linalg::norm1(out.inverse_vectors);
  out.basis = Basis::user;
  return out;
}

// Rescales each mode so that μ_k (P⁻¹)_{k·}² is as close to real positive as possible.
inline EigenSystem phase_aligned_gauge(const EigenSystem& eig) {
  const Eigen::Index N = eig.size();
  Vec d(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const cd s = (eig.inverse_vectors.row(k).array().square()).sum();
    const double phi = 0.5 * std::arg(s);
    d(k) = std::exp(0.5 * I_unit * (std::arg(eig.values(k)) + 2.0 * phi));
  }
  return rescale_columns(eig, d);
}

// ψ_α(x) = 𝒩 exp{½(x−μ)ᵀΣ⁻¹(x−μ)}, φ_α(x) = 𝒩′ exp{½(x−μ′)ᵀ(Σ⁻¹)*(x−μ′)}.
// ψ*φ = 𝒩*𝒩′ exp{−½(x−μ_eff)ᵀΣ_eff⁻¹(x−μ_eff) + c}.
struct BiCoherentParams {
  Vec alpha;
  Mat sigma_inv;
  Vec mu_vec;    // centre of ψ
  Vec mu_prime;  // centre of φ
  cd log_norm_product{0.0, 0.0};
  cd norm_product{1.0, 0.0};
  Mat eff_sigma;
  Vec eff_mu;
  bool integrable = false;
  double min_real_curvature = 0.0;  // smallest eigenvalue of Re Σ_eff⁻¹
};

inline BiCoherentParams coherent_params(const PseudoBosonBasis& basis, const EigenSystem& eig, const Vec& alpha,
                                        double hbar) {
  const Eigen::Index N = eig.size();
  if (alpha.size() != N) throw InvalidSpec("alpha must have length 2n");
  BiCoherentParams p;
  p.alpha = alpha;
  const Mat& P = eig.right_vectors;
  const Mat& Pi = eig.inverse_vectors;
  Mat s = -(1.0 / hbar) * (Pi.transpose() * basis.sqrtJK.asDiagonal() * Pi);
  p.sigma_inv = 0.5 * (s + s.transpose());
  const Mat centre_map = std::sqrt(2.0 * hbar) * (P * basis.quarterJK.cwiseInverse().asDiagonal());
  p.mu_vec = centre_map * alpha;
  p.mu_prime = centre_map.conjugate() * alpha;
  const Mat Q = p.sigma_inv.conjugate();
  const Mat M = -2.0 * Q;  // Σ_eff⁻¹
  Eigen::ComplexEigenSolver<Mat> es(M, false);
  const double big = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(es.eigenvalues().cwiseAbs().minCoeff() > 1e-14 * std::max(big, 1e-300)))
    throw SingularEffectiveSigma("effective Gaussian width matrix is singular");
  Eigen::PartialPivLU<Mat> lu(M);
  p.eff_sigma = lu.inverse();
  p.eff_mu = 0.5 * (p.mu_vec.conjugate() + p.mu_prime);
  const RMat re = 0.5 * (M.real() + M.real().transpose());
  p.min_real_curvature = Eigen::SelfAdjointEigenSolver<RMat>(re, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  p.integrable = p.min_real_curvature > 0.0;
  const Vec mb = p.mu_vec.conjugate();
  const cd c = 0.5 * ((mb.transpose() * Q * mb)(0) + (p.mu_prime.transpose() * Q * p.mu_prime)(0)) -
               (p.eff_mu.transpose() * Q * p.eff_mu)(0);
  cd log_sqrt_det{0.0, 0.0};
  for (Eigen::Index k = 0; k < N; ++k) log_sqrt_det += 0.5 * std::log(es.eigenvalues()(k));
  p.log_norm_product = -0.5 * static_cast<double>(N) * std::log(2.0 * constants::pi) + log_sqrt_det - c;
  p.norm_product = std::exp(p.log_norm_product);
  return p;
}

// α_t = e^{−itμ}α and log of exp{−(it/2)Σμ − ½(|α|² − |α_t|²)}.
inline std::pair<Vec, cd> evolve_alpha(const Vec& alpha, const EigenSystem& eig, double t, double /*hbar*/) {
  Vec at(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) at(k) = std::exp(-I_unit * t * eig.values(k)) * alpha(k);
  const cd log_pref = -0.5 * I_unit * t * eig.values.sum() - 0.5 * (alpha.squaredNorm() - at.squaredNorm());
  return {at, log_pref};
}

}  // namespace qpm
