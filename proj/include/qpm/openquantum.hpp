// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "qpm/parallel.hpp"
#include "qpm/phasespace.hpp"
#include "qpm/selfconsistent.hpp"

namespace qpm {

// x-block (u, v) quantities on a frequency grid.
struct CorrelationSet {
  RVec omega_grid;
  std::vector<Mat> Xi;
  std::vector<Mat> gamma;
  std::vector<Mat> S_ls;
  double eta = 1e-4;
  double hbar = 1.0;
};

// M₀ + (iħ/2)Jᵀ + ⟨q⟩₀⟨q⟩₀ᵀ
inline Mat initial_correlation(const GaussianState& s) {
  const Eigen::Index N = s.mean.size() / 2;
  return s.cov + (0.5 * I_unit * s.hbar) * symplectic_J(N).transpose() + s.mean * s.mean.transpose();
}

// Ξ(t) = exp(−J𝓑t) Ξ(0)
inline Mat correlation_time(const SymplecticFlow& flow, const GaussianState& s0, double t) {
  return flow.lambda(-t) * initial_correlation(s0);
}

inline Mat correlation_time(const ExtendedOperator& ext, const GaussianState& s0, double t) {
  return correlation_time(SymplecticFlow(ext), s0, t);
}

inline Eigen::PartialPivLU<Mat> regularized_resolvent(const ExtendedOperator& ext, double omega, double eta) {
  Mat m = I_unit * ext.gen_JB;
  m.diagonal().array() += cd(omega, eta);
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1e-14)) throw ResonantFrequency("omega = " + std::to_string(omega));
  return lu;
}

// Ξ(ω) = i((ω+iη)E + iJ𝓑)⁻¹ Ξ(0), full 2N × 2N.
inline Mat correlation_frequency_full(const ExtendedOperator& ext, const Mat& xi0, double omega, double eta) {
  return I_unit * regularized_resolvent(ext, omega, eta).solve(xi0);
}

inline void finish_correlations(CorrelationSet& c) {
  const std::size_t m = c.Xi.size();
  c.gamma.resize(m);
  c.S_ls.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Mat& x = c.Xi[i];
    c.gamma[i] = x + x.adjoint();
    c.S_ls[i] = (x - x.adjoint()) / (2.0 * I_unit);
  }
}

inline CorrelationSet correlation_frequency(const ExtendedOperator& ext, const GaussianState& s0, const RVec& omega_grid,
                                            double eta = 1e-4) {
  if (!(eta >= 0.0)) throw InvalidSpec("eta must be non-negative");
  const Eigen::Index N = ext.N();
  const Mat xi0 = initial_correlation(s0);
  CorrelationSet c;
  c.omega_grid = omega_grid;
  c.eta = eta;
  c.hbar = s0.hbar;
  c.Xi.resize(static_cast<std::size_t>(omega_grid.size()));
  parallel_for(c.Xi.size(), [&](std::size_t i) {
    const auto lu = regularized_resolvent(ext, omega_grid(static_cast<Eigen::Index>(i)), eta);
    c.Xi[i] = (I_unit * lu.solve(xi0.rightCols(N))).bottomRows(N);
  });
  finish_correlations(c);
  return c;
}

// Ξ(ω) = −ħ((ω+iη)E + iJ𝓑)⁻¹ n_BE(ħβ iJ𝓑) J
inline CorrelationSet thermal_correlation(const ExtendedOperator& ext, double beta, double hbar, const RVec& omega_grid,
                                          double eta = 1e-4, const linalg::Eig* jb_eig = nullptr) {
  linalg::Eig local;
  if (!jb_eig) {
    local = linalg::eig_sorted(ext.gen_JB);
    jb_eig = &local;
  }
  const Eigen::Index N = ext.N();
  const Mat nb = linalg::function_of(*jb_eig, [&](cd v) {
    const cd x = hbar * beta * I_unit * v;
    const cd m = x / (2.0 * constants::pi * I_unit);
    if (std::abs(m - std::round(m.real())) < 1e-10)
      throw ThermalSingularity("eigenvalue " + std::to_string(v.real()) + "+" + std::to_string(v.imag()) +
                               "i of J𝓑 puts the Bose-Einstein factor on a pole");
    return detail::bose_einstein(x);
  });
  const Mat rhs = (-hbar * nb * symplectic_J(N)).rightCols(N);
  CorrelationSet c;
  c.omega_grid = omega_grid;
  c.eta = eta;
  c.hbar = hbar;
  c.Xi.resize(static_cast<std::size_t>(omega_grid.size()));
  parallel_for(c.Xi.size(), [&](std::size_t i) {
    const auto lu = regularized_resolvent(ext, omega_grid(static_cast<Eigen::Index>(i)), eta);
    c.Xi[i] = lu.solve(rhs).bottomRows(N);
  });
  finish_correlations(c);
  return c;
}

// ħ → 0: Ξ(ω) = −(βiJ𝓑)⁻¹((ω+iη)E + iJ𝓑)⁻¹J
inline CorrelationSet classical_correlation(const ExtendedOperator& ext, double beta, const RVec& omega_grid,
                                            double eta = 1e-4) {
  const Eigen::Index N = ext.N();
  Eigen::PartialPivLU<Mat> gen(beta * I_unit * ext.gen_JB);
  if (!(gen.rcond() > 1e-14)) throw ThermalSingularity("J𝓑 is singular");
  const Mat J = symplectic_J(N);
  CorrelationSet c;
  c.omega_grid = omega_grid;
  c.eta = eta;
  c.hbar = 0.0;
  c.Xi.resize(static_cast<std::size_t>(omega_grid.size()));
  parallel_for(c.Xi.size(), [&](std::size_t i) {
    const auto lu = regularized_resolvent(ext, omega_grid(static_cast<Eigen::Index>(i)), eta);
    c.Xi[i] = (-gen.solve(lu.solve(J.rightCols(N)))).bottomRows(N);
  });
  finish_correlations(c);
  return c;
}

// max_ω |Ξ_η − Ξ_{η/10}|
inline double eta_convergence(const ExtendedOperator& ext, const GaussianState& s0, const RVec& omega_grid, double eta) {
  const auto a = correlation_frequency(ext, s0, omega_grid, eta);
  const auto b = correlation_frequency(ext, s0, omega_grid, eta / 10.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.Xi.size(); ++i) worst = std::max(worst, (a.Xi[i] - b.Xi[i]).cwiseAbs().maxCoeff());
  return worst;
}

inline double min_gamma_eigenvalue(const Mat& gamma) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (gamma + gamma.adjoint()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

struct SystemCoupling {
  Mat H_S;
  std::vector<Mat> A_ops;  // n operators
  double hbar = 1.0;
};

// Bohr frequencies (ε′ − ε)/ħ with A_α(ω) = Σ Π_ε A_α Π_ε′ and B_α(ω) = Σ_ν L̃_αν(ω)A_ν(ω).
struct BohrDecomposition {
  std::vector<double> frequencies;
  std::vector<std::vector<Mat>> A;  // [ω][α]
  std::vector<std::vector<Mat>> B;  // [ω][α]
};

inline BohrDecomposition bohr_decompose(const SystemCoupling& sys, const ExtendedOperator* ext = nullptr,
                                        double tol = 1e-10) {
  const Eigen::Index d = sys.H_S.rows();
  if (sys.H_S.cols() != d) throw InvalidSpec("H_S must be square");
  if ((sys.H_S - sys.H_S.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sys.H_S.cwiseAbs().maxCoeff()))
    throw InvalidSpec("H_S must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sys.H_S + sys.H_S.adjoint()));
  const RVec& e = es.eigenvalues();
  // degenerate clusters
  std::vector<double> energy;
  std::vector<Mat> proj;
  for (Eigen::Index i = 0; i < d; ++i) {
    const Vec v = es.eigenvectors().col(i);
    if (energy.empty() || e(i) - e(i - 1) > tol) {
      energy.push_back(e(i));
      proj.push_back(v * v.adjoint());
    } else {
      proj.back() += v * v.adjoint();
    }
  }
  // group frequencies
  std::vector<double> raw;
  for (double a : energy)
    for (double b : energy) raw.push_back((b - a) / sys.hbar);
  std::sort(raw.begin(), raw.end());
  BohrDecomposition out;
  for (double w : raw)
    if (out.frequencies.empty() || w - out.frequencies.back() > tol) out.frequencies.push_back(w);
  auto slot = [&](double w) {
    auto it = std::lower_bound(out.frequencies.begin(), out.frequencies.end(), w - tol);
    return static_cast<std::size_t>(it - out.frequencies.begin());
  };
  const std::size_t nops = sys.A_ops.size();
  out.A.assign(out.frequencies.size(), std::vector<Mat>(nops, Mat::Zero(d, d)));
  for (std::size_t a = 0; a < energy.size(); ++a)
    for (std::size_t b = 0; b < energy.size(); ++b) {
      const std::size_t s = slot((energy[b] - energy[a]) / sys.hbar);
      for (std::size_t k = 0; k < nops; ++k) out.A[s][k] += proj[a] * sys.A_ops[k] * proj[b];
    }
  if (ext) {
    if (static_cast<Eigen::Index>(nops) != ext->n) throw InvalidSpec("need one coupling operator per source");
    out.B.assign(out.frequencies.size(), std::vector<Mat>(nops, Mat::Zero(d, d)));
    for (std::size_t s = 0; s < out.frequencies.size(); ++s) {
      const Mat L = auxiliary_response(*ext, out.frequencies[s]);
      for (std::size_t a = 0; a < nops; ++a)
        for (std::size_t v = 0; v < nops; ++v)
          out.B[s][a] += L(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(v)) * out.A[s][v];
    }
  }
  return out;
}

// Linear interpolation of a tabulated matrix function of ω.
inline Mat interpolate_on_grid(const RVec& grid, const std::vector<Mat>& values, double w) {
  const Eigen::Index m = grid.size();
  const double span = m > 1 ? grid(m - 1) - grid(0) : 1.0;
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (m == 0 || w < grid(0) - slack || w > grid(m - 1) + slack)
    throw FrequencyNotCovered("Bohr frequency " + std::to_string(w));
  if (m == 1) return values[0];
  const double* begin = grid.data();
  Eigen::Index hi = std::upper_bound(begin, begin + m, w) - begin;
  hi = std::clamp<Eigen::Index>(hi, 1, m - 1);
  const Eigen::Index lo = hi - 1;
  const double t = std::clamp((w - grid(lo)) / (grid(hi) - grid(lo)), 0.0, 1.0);
  return (1.0 - t) * values[static_cast<std::size_t>(lo)] + t * values[static_cast<std::size_t>(hi)];
}

struct MasterEquationTerms {
  Mat lamb_shift;   // H_LS
  Mat dissipator;   // 𝒟(ρ)
  Mat drho_dt;      // −(i/ħ)[H_LS, ρ] + 𝒟(ρ)
  double min_gamma_eigenvalue = 0.0;
};

// O_α(ω): A_α for α < n, B_{α−n} beyond.
inline MasterEquationTerms assemble_master_equation(const SystemCoupling& sys, const BohrDecomposition& bohr,
                                                    const CorrelationSet& corr, const Mat& rho) {
  const Eigen::Index d = sys.H_S.rows();
  const std::size_t n = sys.A_ops.size();
  const bool have_b = !bohr.B.empty();
  std::vector<double> missing;
  for (double w : bohr.frequencies) {
    const Eigen::Index m = corr.omega_grid.size();
    const double slack = 1e-12 * std::max(1.0, m > 1 ? std::abs(corr.omega_grid(m - 1) - corr.omega_grid(0)) : 1.0);
    if (m == 0 || w < corr.omega_grid(0) - slack || w > corr.omega_grid(m - 1) + slack) missing.push_back(w);
  }
  if (!missing.empty()) {
    std::string list;
    for (double w : missing) list += (list.empty() ? "" : ", ") + std::to_string(w);
    throw FrequencyNotCovered("Bohr frequencies not covered by the correlation grid: " + list);
  }
  MasterEquationTerms out;
  out.lamb_shift = Mat::Zero(d, d);
  out.dissipator = Mat::Zero(d, d);
  out.min_gamma_eigenvalue = std::numeric_limits<double>::infinity();
  const double hb = sys.hbar;
  for (std::size_t s = 0; s < bohr.frequencies.size(); ++s) {
    const double w = bohr.frequencies[s];
    const Mat g = interpolate_on_grid(corr.omega_grid, corr.gamma, w);
    const Mat S = interpolate_on_grid(corr.omega_grid, corr.S_ls, w);
    out.min_gamma_eigenvalue = std::min(out.min_gamma_eigenvalue, min_gamma_eigenvalue(g));
    const Eigen::Index N = g.rows();
    std::vector<Mat> O(static_cast<std::size_t>(N), Mat::Zero(d, d));
    for (std::size_t a = 0; a < n; ++a) {
      O[a] = bohr.A[s][a];
      if (have_b && static_cast<Eigen::Index>(n + a) < N) O[n + a] = bohr.B[s][a];
    }
    for (Eigen::Index a = 0; a < N; ++a)
      for (Eigen::Index b = 0; b < N; ++b) {
        const Mat& Oa = O[static_cast<std::size_t>(a)];
        const Mat& Ob = O[static_cast<std::size_t>(b)];
        const Mat adag_b = Oa.adjoint() * Ob;
        out.dissipator += g(a, b) * (Ob * rho * Oa.adjoint() - 0.5 * (adag_b * rho + rho * adag_b));
        out.lamb_shift += S(a, b) * adag_b;
      }
  }
  out.dissipator /= hb * hb;
  out.lamb_shift /= hb;
  out.drho_dt = (-I_unit / hb) * (out.lamb_shift * rho - rho * out.lamb_shift) + out.dissipator;
  return out;
}

}  // namespace qpm
