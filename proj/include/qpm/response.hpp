// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qpm/parallel.hpp"
#include "qpm/spectral.hpp"

namespace qpm {

struct SpectrumTable {
  RVec omega_grid;  // Hartree
  RVec im_alpha;
  RVec absorptive;  // empty for the direct sweep
  RVec dispersive;
};

struct ModeLedger {
  Vec mu;
  Vec lambda;
  Vec intercept;      // I_k
  Vec angle;          // A_k
  Vec left_weights;   // (P⁻¹w₀)_k
  Vec left_weights1;  // (P⁻¹w₁)_k
  Vec right_weights;  // (Pᵀr)_k
  cd trace_fR{0.0, 0.0};

  Eigen::Index size() const { return mu.size(); }
  cd coefficient(Eigen::Index k, double omega) const { return intercept(k) - I_unit * omega * angle(k); }
};

using IndexSet = std::vector<Eigen::Index>;

inline IndexSet all_modes(const ModeLedger& l) {
  IndexSet s(static_cast<std::size_t>(l.size()));
  for (Eigen::Index k = 0; k < l.size(); ++k) s[static_cast<std::size_t>(k)] = k;
  return s;
}

// lo + i·step for i = 0..count-1, both ends included.
inline RVec frequency_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw InvalidSpec("frequency step must be positive");
  if (hi < lo) throw InvalidSpec("frequency window is empty");
  const auto count = static_cast<Eigen::Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  RVec g(count);
  for (Eigen::Index i = 0; i < count; ++i) g(i) = lo + static_cast<double>(i) * step;
  return g;
}

// Per ω: solve (ω² + 2iωΓ − K)u = f(ω), Im α = Im Σ R_β u_β.
inline SpectrumTable polarizability_direct(const MediumSpec& spec, const DriveSignal& drive, const RVec& omega_grid) {
  spec.validate();
  validate_drive(drive, spec.n);
  const Eigen::Index n = spec.n;
  SpectrumTable out;
  out.omega_grid = omega_grid;
  out.im_alpha.resize(omega_grid.size());
  const Vec R = spec.gen_coord_vector.cast<cd>();
  parallel_for(static_cast<std::size_t>(omega_grid.size()), [&](std::size_t i) {
    const double w = omega_grid(static_cast<Eigen::Index>(i));
    Mat Q = -spec.kernel;
    Q += (2.0 * I_unit * w) * spec.damping;
    Q.diagonal().array() += w * w;
    const linalg::DenseLU lu(std::move(Q));
    if (!(lu.rcond() > 1e-14)) throw SingularAtFrequency("omega = " + std::to_string(w));
    const Vec u = lu.solve(drive_amplitude_frequency(drive, n, w));
    out.im_alpha(static_cast<Eigen::Index>(i)) = R.dot(u).imag();  // R real: dot conjugates nothing
  });
  return out;
}

// Intercepts and angles from rank-1 weights: w₀ = [f; −2Γf], w₁ = [0; f], r = [R; 0].
inline ModeLedger decompose_modes(const EigenSystem& eig, const MediumSpec& spec, const Kick& kick) {
  if (eig.defective) throw DefectiveMatrix("decomposition requires a diagonalizable extended kernel");
  const Eigen::Index n = spec.n;
  if (kick.f.size() != n) throw InvalidSpec("kick amplitude must have length n");
  const Vec f = kick.f.cast<cd>();
  Vec w0(2 * n), w1(2 * n), r(2 * n);
  w0 << f, -2.0 * spec.damping * f;
  w1 << Vec::Zero(n), f;
  r << spec.gen_coord_vector.cast<cd>(), Vec::Zero(n);
  ModeLedger l;
  l.mu = eig.values;
  l.lambda = eig.values.cwiseProduct(eig.values);
  l.left_weights = eig.inverse_vectors * w0;
  l.left_weights1 = eig.inverse_vectors * w1;
  l.right_weights = eig.right_vectors.transpose() * r;
  l.intercept = l.left_weights.cwiseProduct(l.right_weights);
  l.angle = l.left_weights1.cwiseProduct(l.right_weights);
  l.trace_fR = (f.transpose() * spec.gen_coord_vector.cast<cd>())(0);
  return l;
}

// Im α = Σ_k 𝒜_k Re C_kk + 𝒟_k Im C_kk over the selected modes.
inline SpectrumTable reconstruct_spectrum(const ModeLedger& l, const IndexSet& selected, const RVec& omega_grid) {
  SpectrumTable out;
  out.omega_grid = omega_grid;
  out.absorptive = RVec::Zero(omega_grid.size());
  out.dispersive = RVec::Zero(omega_grid.size());
  parallel_for(static_cast<std::size_t>(omega_grid.size()), [&](std::size_t i) {
    const double w = omega_grid(static_cast<Eigen::Index>(i));
    const double w2 = w * w;
    double a = 0.0, d = 0.0;
    for (Eigen::Index k : selected) {
      const double lr = l.lambda(k).real(), li = l.lambda(k).imag();
      const double den = (w2 - lr) * (w2 - lr) + li * li;
      const cd c = l.coefficient(k, w);
      a += li / den * c.real();
      d += (w2 - lr) / den * c.imag();
    }
    out.absorptive(static_cast<Eigen::Index>(i)) = a;
    out.dispersive(static_cast<Eigen::Index>(i)) = d;
  });
  out.im_alpha = out.absorptive + out.dispersive;
  return out;
}

inline IndexSet filter_eigenvalue(const ModeLedger& l, double omega_lo, double omega_hi) {
  if (omega_lo > omega_hi) throw InvalidSpec("omega_lo must not exceed omega_hi");
  IndexSet s;
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    const double a = std::abs(l.mu(k).real());
    if (a >= omega_lo && a <= omega_hi) s.push_back(k);
  }
  return s;
}

inline IndexSet filter_intercept(const ModeLedger& l, double threshold) {
  if (threshold < 0.0) throw InvalidSpec("threshold must be non-negative");
  IndexSet s;
  for (Eigen::Index k = 0; k < l.size(); ++k)
    if (std::abs(l.intercept(k).real()) > threshold) s.push_back(k);
  return s;
}

// The `count` modes with largest |Re I_k| (ties by index).
inline IndexSet top_intercepts(const ModeLedger& l, std::size_t count) {
  IndexSet s = all_modes(l);
  std::stable_sort(s.begin(), s.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(l.intercept(a).real()) > std::abs(l.intercept(b).real());
  });
  if (count < s.size()) s.resize(count);
  std::sort(s.begin(), s.end());
  return s;
}

inline double relative_l2(const RVec& approx, const RVec& ref) { return (approx - ref).norm() / ref.norm(); }

inline double relative_linf(const RVec& approx, const RVec& ref) {
  return (approx - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

}  // namespace qpm
