// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qpm/constants.hpp"
#include "qpm/parallel.hpp"
#include "qpm/spectral.hpp"

namespace qpm {

// q = [π_u, π_v, u, v]
struct GaussianState {
  Vec mean;
  Mat cov;
  double hbar = 1.0;
};

struct Propagator {
  Mat lambda_t;
  Vec delta_t;
  double t = 0.0;
  bool fallback_used = false;
};

// J = [[0, I], [−I, 0]] of order 2N.
inline Mat symplectic_J(Eigen::Index N) {
  Mat j = Mat::Zero(2 * N, 2 * N);
  j.topRightCorner(N, N) = Mat::Identity(N, N);
  j.bottomLeftCorner(N, N) = -Mat::Identity(N, N);
  return j;
}

// 𝓑 = diag(A, A⁻¹𝒦)
inline Mat hamiltonian_B(const ExtendedOperator& ext) {
  const Eigen::Index N = ext.N();
  Mat b = Mat::Zero(2 * N, 2 * N);
  b.topLeftCorner(N, N) = ext.sim_A;
  b.bottomRightCorner(N, N) = ext.sim_A_inv * ext.kappa;
  return b;
}

// exp(J𝓑t) through the eigendecomposition of J𝓑; scaling and squaring when the
// eigenvector matrix is ill-conditioned.
class SymplecticFlow {
 public:
  explicit SymplecticFlow(const ExtendedOperator& ext, double cond_threshold = 1e8) : jb_(ext.gen_JB) {
    if (jb_.size() == 0) throw SingularSimilarity("symplectic generator not built");
    eig_ = linalg::eig_sorted(jb_);
    fallback_ = !(eig_.cond <= cond_threshold);
  }

  Mat lambda(double t) const {
    if (t == 0.0) return Mat::Identity(jb_.rows(), jb_.cols());
    if (fallback_) return (jb_ * cd(t, 0.0)).exp();
    return linalg::function_of(eig_, [t](cd v) { return std::exp(v * t); });
  }

  bool fallback_used() const { return fallback_; }
  const linalg::Eig& eigen() const { return eig_; }
  const Mat& generator() const { return jb_; }

 private:
  Mat jb_;
  linalg::Eig eig_;
  bool fallback_ = false;
};

// J𝒞_t = [A⁻¹F_t; 0]
inline Vec symplectic_source(const ExtendedOperator& ext, const DriveSignal& drive, double t) {
  const Eigen::Index N = ext.N();
  Vec jc = Vec::Zero(2 * N);
  jc.head(N) = ext.sim_A_inv * extended_force(ext.damping, drive, t);
  return jc;
}

inline Propagator propagator_at(const SymplecticFlow& flow, const ExtendedOperator& ext, double t,
                                const std::optional<DriveSignal>& drive = {}, double dt = 1e-3) {
  Propagator p;
  p.t = t;
  p.lambda_t = flow.lambda(t);
  p.fallback_used = flow.fallback_used();
  p.delta_t = Vec::Zero(2 * ext.N());
  if (drive && t != 0.0) {
    const auto steps = std::max<long long>(1, static_cast<long long>(std::ceil(std::abs(t) / dt - 1e-9)));
    const double h = t / static_cast<double>(steps);
    auto rhs = [&](double s, const Vec&) -> Vec { return flow.lambda(s) * symplectic_source(ext, *drive, s); };
    for (long long k = 0; k < steps; ++k) p.delta_t = rk4_step(rhs, static_cast<double>(k) * h, p.delta_t, h);
  }
  return p;
}

inline Propagator propagator_at(const ExtendedOperator& ext, double t, const std::optional<DriveSignal>& drive = {},
                                double dt = 1e-3) {
  return propagator_at(SymplecticFlow(ext), ext, t, drive, dt);
}

// Mean from classical data: x₀ and π₀ = A⁻¹ẋ₀.
inline GaussianState state_from_classical(const ExtendedOperator& ext, const Vec& x0, const Vec& xdot0,
                                          const Mat& cov = {}, double hbar = 1.0) {
  const Eigen::Index N = ext.N();
  if (x0.size() != N || xdot0.size() != N) throw InvalidSpec("initial data must have length 2n");
  GaussianState s;
  s.hbar = hbar;
  s.mean.resize(2 * N);
  s.mean << ext.sim_A_inv * xdot0, x0;
  s.cov = cov.size() ? cov : Mat::Zero(2 * N, 2 * N);
  return s;
}

// ⟨q⟩_t = Λ_t⁻¹(⟨q⟩₀ − Δ_t), M_t = Λ_t⁻¹M₀Λ_t⁻ᵀ
inline GaussianState evolve_state(const GaussianState& s, const Propagator& p) {
  Eigen::PartialPivLU<Mat> lu(p.lambda_t);
  GaussianState out;
  out.hbar = s.hbar;
  out.mean = lu.solve(s.mean - p.delta_t);
  const Mat li = lu.inverse();
  out.cov = li * s.cov * li.transpose();
  return out;
}

// Means (and covariances) on a time grid; Δ accumulated by RK4 along the grid.
inline std::vector<GaussianState> propagate_trajectory(const ExtendedOperator& ext, const GaussianState& s0,
                                                       const std::optional<DriveSignal>& drive,
                                                       const std::vector<double>& t_grid, bool with_cov = true) {
  check_grid(t_grid);
  const SymplecticFlow flow(ext);
  const Eigen::Index N = ext.N();
  std::vector<GaussianState> out;
  out.reserve(t_grid.size());
  Vec delta = Vec::Zero(2 * N);
  if (drive && t_grid[0] != 0.0) delta = propagator_at(flow, ext, t_grid[0], drive).delta_t;
  auto rhs = [&](double s, const Vec&) -> Vec { return flow.lambda(s) * symplectic_source(ext, *drive, s); };
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && drive) delta = rk4_step(rhs, t_grid[i - 1], delta, t_grid[i] - t_grid[i - 1]);
    const Mat li = flow.lambda(-t_grid[i]);
    GaussianState st;
    st.hbar = s0.hbar;
    st.mean = li * (s0.mean - delta);
    if (with_cov) st.cov = li * s0.cov * li.transpose();
    out.push_back(std::move(st));
  }
  return out;
}

namespace detail {

// cot z without overflow for large |Im z|.
inline cd stable_cot(cd z) {
  if (z.imag() >= 0.0) {
    const cd e = std::exp(2.0 * I_unit * z);
    return I_unit * (e + 1.0) / (e - 1.0);
  }
  const cd e = std::exp(-2.0 * I_unit * z);
  return I_unit * (1.0 + e) / (1.0 - e);
}

// 1/(eˣ − 1)
inline cd bose_einstein(cd x) {
  if (x.real() > 0.0) {
    const cd e = std::exp(-x);
    return e / (1.0 - e);
  }
  return 1.0 / (std::exp(x) - 1.0);
}

}  // namespace detail

// M₀ = −(ħ/2)cot(ħβJ𝓑/2)Jᵀ, ⟨q⟩₀ = 0.
inline GaussianState thermal_state(const ExtendedOperator& ext, double beta, double hbar,
                                   const linalg::Eig* jb_eig = nullptr) {
  linalg::Eig local;
  if (!jb_eig) {
    local = linalg::eig_sorted(ext.gen_JB);
    jb_eig = &local;
  }
  const Mat c = linalg::function_of(*jb_eig, [&](cd v) {
    const cd z = 0.5 * hbar * beta * v;
    const cd m = z / cd(constants::pi, 0.0);
    if (std::abs(m - std::round(m.real())) < 1e-10)
      throw ThermalSingularity("eigenvalue " + std::to_string(v.real()) + "+" + std::to_string(v.imag()) +
                               "i of J𝓑 puts the cotangent on a pole");
    return detail::stable_cot(z);
  });
  const Eigen::Index N = ext.N();
  GaussianState s;
  s.hbar = hbar;
  s.mean = Vec::Zero(2 * N);
  const Mat m = -0.5 * hbar * c * symplectic_J(N).transpose();
  s.cov = 0.5 * (m + m.transpose());
  return s;
}

// Solve (ωE + iJ𝓑)y = −iJ𝒞̃ with 𝒞̃ = [0; A⁻¹F̃(ω)].
inline Vec mean_from_source(const ExtendedOperator& ext, double omega, const Vec& jc) {
  Mat m = I_unit * ext.gen_JB;
  m.diagonal().array() += omega;
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1e-14)) throw ResonantFrequency("omega = " + std::to_string(omega));
  return lu.solve(-I_unit * jc);
}

inline Mat mean_in_frequency(const ExtendedOperator& ext, const DriveSignal& drive, const RVec& omega_grid) {
  const Eigen::Index N = ext.N();
  Mat out(2 * N, omega_grid.size());
  parallel_for(static_cast<std::size_t>(omega_grid.size()), [&](std::size_t i) {
    const double w = omega_grid(static_cast<Eigen::Index>(i));
    Vec jc = Vec::Zero(2 * N);
    jc.head(N) = ext.sim_A_inv * extended_force_frequency(ext.damping, drive, w);
    out.col(static_cast<Eigen::Index>(i)) = mean_from_source(ext, w, jc);
  });
  return out;
}

}  // namespace qpm
