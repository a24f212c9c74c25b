// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "qpm/constants.hpp"
#include "qpm/parallel.hpp"
#include "qpm/spectral.hpp"

namespace qpm {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

// L̃(ω) = −[A₃ + (iω + 2Γ)A₂]⁻¹[A₂ᵀ + (iω + 2Γ)A₁]
inline Mat auxiliary_response(const ExtendedOperator& ext, double omega) {
  if (!ext.has_similarity()) throw SingularSimilarity("similarity matrix not built");
  Mat d = 2.0 * ext.damping;
  d.diagonal().array() += I_unit * omega;
  const Mat lhs = ext.A3 + d * ext.A2;
  const Mat rhs = ext.A2.transpose() + d * ext.A1;
  Eigen::PartialPivLU<Mat> lu(lhs);
  if (!(lu.rcond() > 1e-14)) throw SingularAuxiliary("omega = " + std::to_string(omega));
  return -lu.solve(rhs);
}

// (−iωA₂ − A₃ − 2ΓA₂)g̃ − (A₂ᵀ + 2ΓA₁ + iωA₁)h̃, relative to the size of either term.
inline double auxiliary_residual(const ExtendedOperator& ext, double omega, const Vec& h, const Vec& g) {
  const Mat G2 = 2.0 * ext.damping;
  const Vec left = (-I_unit * omega * ext.A2 - ext.A3 - G2 * ext.A2) * g;
  const Vec right = (ext.A2.transpose() + G2 * ext.A1 + I_unit * omega * ext.A1) * h;
  return (left - right).norm() / std::max({left.norm(), right.norm(), 1e-300});
}

// G̃(k; R, Σ) = exp(−ikᵀR − ½kᵀΣk)
inline cd gaussian_ft(const Vec3& k, const Vec3& R, const Eigen::Matrix3d& Sigma) {
  return std::exp(cd(-0.5 * k.dot(Sigma * k), -k.dot(R)));
}

// 𝒢_ij = 4π(δ_ij ω² − c²k_ik_j)/(ω² − c²|k|²)
inline CMat3 green_tensor(const Vec3& k, double omega, double light_cone_tol = 1e-12) {
  const double c2 = constants::speed_of_light * constants::speed_of_light;
  const double w2 = omega * omega;
  const double den = w2 - c2 * k.squaredNorm();
  if (std::abs(den) <= light_cone_tol * std::max({w2, c2 * k.squaredNorm(), 1e-300}))
    throw LightConeSingularity("|k| = " + std::to_string(k.norm()) + ", omega = " + std::to_string(omega));
  const Eigen::Matrix3d g = (w2 * Eigen::Matrix3d::Identity() - c2 * (k * k.transpose()).eval()) * (4.0 * constants::pi / den);
  return g.cast<cd>();
}

// R_{lβ}: position for charges, unit vector along the polarization axis for dipole components.
inline RMat dipole_map(const MediumSpec& spec) {
  int axis = 2;
  for (int j = 0; j < 3; ++j) {
    bool ok = true, any = false;
    for (Eigen::Index b = 0; b < spec.n; ++b)
      if (spec.source_kind[static_cast<std::size_t>(b)] == SourceKind::charge) {
        any = true;
        if (spec.coords(j, b) != spec.gen_coord_vector(b)) ok = false;
      }
    if (any && ok) {
      axis = j;
      break;
    }
  }
  RMat r = spec.coords;
  for (Eigen::Index b = 0; b < spec.n; ++b)
    if (spec.source_kind[static_cast<std::size_t>(b)] == SourceKind::dipole_component) {
      r.col(b).setZero();
      r(axis, b) = 1.0;
    }
  return r;
}

// Frequency-fixed part of T: W = R⁻¹[N+α, 0:n] + R⁻¹[N+α, n:2n]·L̃(ω), R = ωE + iJ𝓑.
struct ScatteringKernel {
  double omega = 0.0;
  Mat W;  // n × n
  Mat L;  // L̃(ω)

  // T(k) = (i/(2π)³) W diag(G̃_β(k)) Rᵀ, n × 3
  Mat T(const MediumSpec& spec, const Vec3& k) const {
    const Eigen::Index n = spec.n;
    const RMat r = dipole_map(spec);
    Mat weights(n, 3);
    for (Eigen::Index b = 0; b < n; ++b) {
      const cd gb = gaussian_ft(k, spec.coords.col(b), spec.covariances[static_cast<std::size_t>(b)]);
      weights.row(b) = gb * r.col(b).transpose().cast<cd>();
    }
    const double inv = 1.0 / std::pow(2.0 * constants::pi, 3);
    return (I_unit * inv) * (W * weights);
  }
};

inline ScatteringKernel scattering_kernel(const ExtendedOperator& ext, double omega) {
  const Eigen::Index n = ext.n, N = ext.N();
  Mat m = I_unit * ext.gen_JB;
  m.diagonal().array() += omega;
  // rows N..N+n−1 of m⁻¹ via the transposed system
  Eigen::PartialPivLU<Mat> lu(m.transpose());
  if (!(lu.rcond() > 1e-14)) throw ResonantFrequency("omega = " + std::to_string(omega));
  Mat sel = Mat::Zero(2 * N, n);
  for (Eigen::Index a = 0; a < n; ++a) sel(N + a, a) = 1.0;
  const Mat rows = lu.solve(sel).transpose();  // n × 2N
  ScatteringKernel sk;
  sk.omega = omega;
  sk.L = auxiliary_response(ext, omega);
  sk.W = rows.leftCols(n) + rows.middleCols(n, n) * sk.L;
  return sk;
}

inline Mat scattering_T(const ExtendedOperator& ext, const MediumSpec& spec, const Vec3& k, double omega) {
  return scattering_kernel(ext, omega).T(spec, k);
}

struct PlaneWave {
  Vec3 k;
  std::vector<CVec3> amplitude;  // one per grid frequency
};

struct FieldPlaneWaveSet {
  std::vector<PlaneWave> waves;
};

// Quadrature nodes for the optional higher-order loop.
struct KQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
};

struct EmittedField {
  RVec omega_grid;
  std::vector<Vec3> k_query;
  // values[iω][iq] = scattered Ẽ(k_q, ω)
  std::vector<std::vector<CVec3>> values;
  int iterations = 0;
};

namespace detail {

// M(k) = (2π)³ 𝒢(k,ω) R diag(G̃(k)), 3 × n
inline Eigen::MatrixXcd emission_map(const MediumSpec& spec, const Vec3& k, double omega) {
  const Eigen::Index n = spec.n;
  const RMat r = dipole_map(spec);
  Eigen::MatrixXcd rg(3, n);
  for (Eigen::Index a = 0; a < n; ++a)
    rg.col(a) = r.col(a).cast<cd>() *
                gaussian_ft(k, spec.coords.col(a), spec.covariances[static_cast<std::size_t>(a)]);
  return std::pow(2.0 * constants::pi, 3) * (green_tensor(k, omega) * rg);
}

}  // namespace detail

// Scattered part of Ẽ(k, ω). iterations = 0 is the first-order field; each further
// iteration feeds the scattered field at the quadrature nodes back through T.
inline EmittedField emitted_field_first_order(const ExtendedOperator& ext, const MediumSpec& spec,
                                              const FieldPlaneWaveSet& ext_field, const std::vector<Vec3>& k_query,
                                              const RVec& omega_grid, int iterations = 0,
                                              const KQuadrature* quadrature = nullptr) {
  for (const auto& w : ext_field.waves)
    if (static_cast<Eigen::Index>(w.amplitude.size()) != omega_grid.size())
      throw InvalidSpec("plane-wave amplitudes must be aligned with the frequency grid");
  if (iterations > 0 && !quadrature) throw InvalidSpec("iterated field needs k-space quadrature nodes");
  EmittedField out;
  out.omega_grid = omega_grid;
  out.k_query = k_query;
  out.iterations = iterations;
  out.values.assign(static_cast<std::size_t>(omega_grid.size()), std::vector<CVec3>(k_query.size()));
  parallel_for(static_cast<std::size_t>(omega_grid.size()), [&](std::size_t iw) {
    const double w = omega_grid(static_cast<Eigen::Index>(iw));
    const ScatteringKernel sk = scattering_kernel(ext, w);
    // Ẽ_scat(k) = M(k)Y with Y = Σ_p T(−k_p)𝒜_p at first order
    Vec y = Vec::Zero(spec.n);
    for (const auto& pw : ext_field.waves) y += sk.T(spec, -pw.k) * pw.amplitude[iw];
    if (iterations > 0) {
      Mat q = Mat::Zero(spec.n, spec.n);
      for (std::size_t j = 0; j < quadrature->nodes.size(); ++j)
        q += quadrature->weights[j] / std::pow(2.0 * constants::pi, 3) * sk.T(spec, -quadrature->nodes[j]) *
             detail::emission_map(spec, quadrature->nodes[j], w);
      const Vec y0 = y;
      for (int it = 0; it < iterations; ++it) y = y0 + q * y;
    }
    for (std::size_t iq = 0; iq < k_query.size(); ++iq)
      out.values[iw][iq] = detail::emission_map(spec, k_query[iq], w) * y;
  });
  return out;
}

}  // namespace qpm
