// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "qpm/linalg.hpp"

namespace qpm {

enum class SourceKind { charge, dipole_component };

// Defining data of ü + 2Γu̇ + Ku + f = 0. Lengths in bohr.
struct MediumSpec {
  Eigen::Index n = 0;
  RMat coords;  // 3 x n
  std::vector<Eigen::Matrix3d> covariances;
  Mat kernel;   // K
  Mat damping;  // Γ
  std::vector<SourceKind> source_kind;
  RVec gen_coord_vector;

  void validate() const {
    if (n <= 0) throw InvalidSpec("n must be positive");
    if (coords.rows() != 3 || coords.cols() != n) throw InvalidSpec("coords must be 3 x n");
    if (kernel.rows() != n || kernel.cols() != n) throw InvalidSpec("kernel must be n x n");
    if (damping.rows() != n || damping.cols() != n) throw InvalidSpec("damping must be n x n");
    if (!kernel.allFinite() || !damping.allFinite() || !coords.allFinite())
      throw InvalidSpec("non-finite entries");
    if (static_cast<Eigen::Index>(covariances.size()) != n) throw InvalidSpec("need n covariances");
    for (const auto& s : covariances) {
      if (!s.allFinite()) throw InvalidSpec("non-finite covariance");
      if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()))
        throw InvalidSpec("covariance not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + s.cwiseAbs().maxCoeff()))
        throw InvalidSpec("covariance not positive semidefinite");
    }
    if (static_cast<Eigen::Index>(source_kind.size()) != n) throw InvalidSpec("need n source kinds");
    if (gen_coord_vector.size() != n) throw InvalidSpec("gen_coord_vector must have length n");
    // Charges share one Cartesian component; dipole components carry 1.
    bool axis_ok[3] = {true, true, true};
    bool any_charge = false;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double r = gen_coord_vector(b);
      if (source_kind[static_cast<std::size_t>(b)] == SourceKind::dipole_component) {
        if (r != 1.0) throw InvalidSpec("dipole source " + std::to_string(b) + " needs unit entry");
      } else {
        any_charge = true;
        for (int j = 0; j < 3; ++j)
          if (std::abs(coords(j, b) - r) > 1e-12 * (1.0 + std::abs(r))) axis_ok[j] = false;
      }
    }
    if (any_charge && !(axis_ok[0] || axis_ok[1] || axis_ok[2]))
      throw InvalidSpec("gen_coord_vector does not match a coordinate component of the charges");
  }
};

// Builds gen_coord_vector for a Cartesian axis.
inline RVec make_gen_coord_vector(const RMat& coords, const std::vector<SourceKind>& kinds, int axis) {
  RVec r(coords.cols());
  for (Eigen::Index b = 0; b < coords.cols(); ++b)
    r(b) = kinds[static_cast<std::size_t>(b)] == SourceKind::charge ? coords(axis, b) : 1.0;
  return r;
}

struct Kick {
  RVec f;
};
struct Monochromatic {
  RVec f;
  double omega0 = 0.0;
};
// f(t) and ḟ(t) sampled on a strictly increasing grid; columns are samples.
struct Tabulated {
  RVec t;
  RMat f;
  RMat fdot;
};
using DriveSignal = std::variant<Kick, Monochromatic, Tabulated>;

struct DriveValue {
  Vec f;
  Vec fdot;
};

inline void validate_drive(const DriveSignal& drive, Eigen::Index n) {
  if (const auto* k = std::get_if<Kick>(&drive)) {
    if (k->f.size() != n) throw InvalidSpec("kick amplitude must have length n");
  } else if (const auto* m = std::get_if<Monochromatic>(&drive)) {
    if (m->f.size() != n) throw InvalidSpec("drive amplitude must have length n");
  } else {
    const auto& tab = std::get<Tabulated>(drive);
    if (tab.t.size() < 2) throw InvalidSpec("tabulated drive needs at least two samples");
    for (Eigen::Index i = 1; i < tab.t.size(); ++i)
      if (!(tab.t(i) > tab.t(i - 1))) throw InvalidSpec("tabulated grid must be strictly increasing");
    if (tab.f.rows() != n || tab.fdot.rows() != n || tab.f.cols() != tab.t.size() ||
        tab.fdot.cols() != tab.t.size())
      throw InvalidSpec("tabulated samples must be n x len(t)");
  }
}

// Kick: constant amplitude between impulses. Monochromatic: f cos(ω₀t).
inline DriveValue evaluate_drive(const DriveSignal& drive, Eigen::Index n, double t) {
  DriveValue out{Vec::Zero(n), Vec::Zero(n)};
  if (const auto* k = std::get_if<Kick>(&drive)) {
    out.f = k->f.cast<cd>();
  } else if (const auto* m = std::get_if<Monochromatic>(&drive)) {
    out.f = (m->f * std::cos(m->omega0 * t)).cast<cd>();
    out.fdot = (-m->omega0 * std::sin(m->omega0 * t) * m->f).cast<cd>();
  } else {
    const auto& tab = std::get<Tabulated>(drive);
    const Eigen::Index last = tab.t.size() - 1;
    if (t < tab.t(0) || t > tab.t(last))
      throw OutOfRange("t = " + std::to_string(t) + " outside tabulated grid");
    const double* begin = tab.t.data();
    Eigen::Index hi = std::upper_bound(begin, begin + tab.t.size(), t) - begin;
    if (hi > last) hi = last;
    const Eigen::Index lo = hi - 1;
    const double w = (t - tab.t(lo)) / (tab.t(hi) - tab.t(lo));
    out.f = ((1.0 - w) * tab.f.col(lo) + w * tab.f.col(hi)).cast<cd>();
    out.fdot = ((1.0 - w) * tab.fdot.col(lo) + w * tab.fdot.col(hi)).cast<cd>();
  }
  return out;
}

// Frequency amplitude f(ω) = ∫ f(t) e^{iωt} dt.
inline Vec drive_amplitude_frequency(const DriveSignal& drive, Eigen::Index n, double omega) {
  if (const auto* k = std::get_if<Kick>(&drive)) return k->f.cast<cd>();
  if (std::holds_alternative<Monochromatic>(drive))
    throw UnsupportedDrive("monochromatic drive has no finite frequency amplitude");
  const auto& tab = std::get<Tabulated>(drive);
  Vec acc = Vec::Zero(n);
  for (Eigen::Index i = 0; i + 1 < tab.t.size(); ++i) {
    const double h = tab.t(i + 1) - tab.t(i);
    acc += 0.5 * h *
           (std::exp(I_unit * omega * tab.t(i)) * tab.f.col(i).cast<cd>() +
            std::exp(I_unit * omega * tab.t(i + 1)) * tab.f.col(i + 1).cast<cd>());
  }
  return acc;
}

// 𝒦 = [[K, 2Γ], [−2ΓK, K − 4Γ²]]
inline Mat extended_kappa(const Mat& K, const Mat& G) {
  const Eigen::Index n = K.rows();
  Mat k(2 * n, 2 * n);
  k.topLeftCorner(n, n) = K;
  k.topRightCorner(n, n) = 2.0 * G;
  k.bottomLeftCorner(n, n) = -2.0 * G * K;
  k.bottomRightCorner(n, n) = K - 4.0 * G * G;
  return k;
}

// F(t) = [f; ḟ − 2Γf]
inline Vec extended_force(const Mat& damping, const DriveSignal& drive, double t) {
  const Eigen::Index n = damping.rows();
  const auto d = evaluate_drive(drive, n, t);
  Vec F(2 * n);
  F.head(n) = d.f;
  F.tail(n) = d.fdot - 2.0 * damping * d.f;
  return F;
}

inline Vec build_extended_force(const MediumSpec& spec, const DriveSignal& drive, double t) {
  return extended_force(spec.damping, drive, t);
}

// F(ω) = [f(ω); (−iω − 2Γ)f(ω)]
inline Vec extended_force_frequency(const Mat& damping, const DriveSignal& drive, double omega) {
  const Eigen::Index n = damping.rows();
  const Vec f = drive_amplitude_frequency(drive, n, omega);
  Vec F(2 * n);
  F.head(n) = f;
  F.tail(n) = -I_unit * omega * f - 2.0 * damping * f;
  return F;
}

template <class Rhs>
Vec rk4_step(const Rhs& rhs, double t, const Vec& y, double h) {
  const Vec k1 = rhs(t, y);
  const Vec k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = rhs(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw InvalidSpec("empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidSpec("time grid must be strictly increasing");
}

inline std::vector<double> uniform_grid(double t0, double t1, double dt) {
  const auto steps = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) g[i] = t0 + static_cast<double>(i) * dt;
  return g;
}

struct TrajectorySample {
  double t = 0.0;
  Vec u;
  Vec v;
};

// RK4 on (u, u̇), one step per grid interval.
inline std::vector<TrajectorySample> integrate_reference_second_order(const MediumSpec& spec,
                                                                      const DriveSignal& drive,
                                                                      const Vec& u0, const Vec& v0,
                                                                      const std::vector<double>& t_grid) {
  const Eigen::Index n = spec.n;
  if (u0.size() != n || v0.size() != n) throw InvalidSpec("u0, v0 must have length n");
  check_grid(t_grid);
  auto rhs = [&](double t, const Vec& y) {
    Vec dy(2 * n);
    const auto d = evaluate_drive(drive, n, t);
    dy.head(n) = y.tail(n);
    dy.tail(n) = -2.0 * spec.damping * y.tail(n) - spec.kernel * y.head(n) - d.f;
    return dy;
  };
  Vec y(2 * n);
  y << u0, v0;
  std::vector<TrajectorySample> out;
  out.reserve(t_grid.size());
  out.push_back({t_grid[0], u0, v0});
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    y = rk4_step(rhs, t_grid[i - 1], y, t_grid[i] - t_grid[i - 1]);
    if (!y.allFinite()) throw NonFinite("second-order trajectory overflowed at t = " + std::to_string(t_grid[i]));
    out.push_back({t_grid[i], y.head(n), y.tail(n)});
  }
  return out;
}

struct ExtendedSample {
  double t = 0.0;
  Vec x;
  Vec xdot;
};

// ẋ(0) = [u̇₀; −Ku₀ − 2Γu̇₀ − f(0)]
inline Vec consistent_xdot0(const MediumSpec& spec, const DriveSignal& drive, const Vec& u0,
                            const Vec& udot0, double t0 = 0.0) {
  const auto d = evaluate_drive(drive, spec.n, t0);
  Vec xd(2 * spec.n);
  xd.head(spec.n) = udot0;
  xd.tail(spec.n) = -spec.kernel * u0 - 2.0 * spec.damping * udot0 - d.f;
  return xd;
}

// RK4 on ẍ + 𝒦x + F(t) = 0 after checking the initial data against the constraint.
inline std::vector<ExtendedSample> integrate_reference_extended(const MediumSpec& spec,
                                                                const DriveSignal& drive, const Vec& x0,
                                                                const Vec& xdot0,
                                                                const std::vector<double>& t_grid,
                                                                double tolerance = 1e-10) {
  const Eigen::Index n = spec.n;
  if (x0.size() != 2 * n || xdot0.size() != 2 * n) throw InvalidSpec("x0, xdot0 must have length 2n");
  check_grid(t_grid);
  const Vec expected = consistent_xdot0(spec, drive, x0.head(n), x0.tail(n), t_grid[0]);
  const double scale = std::max(1.0, expected.norm() + x0.norm());
  const double dev = (xdot0 - expected).norm();
  if (dev > tolerance * scale)
    throw InconsistentInitialConditions("xdot0 deviates from the constraint by " + std::to_string(dev));
  const Mat kappa = extended_kappa(spec.kernel, spec.damping);
  auto rhs = [&](double t, const Vec& y) {
    Vec dy(4 * n);
    dy.head(2 * n) = y.tail(2 * n);
    dy.tail(2 * n) = -kappa * y.head(2 * n) - build_extended_force(spec, drive, t);
    return dy;
  };
  Vec y(4 * n);
  y << x0, xdot0;
  std::vector<ExtendedSample> out;
  out.reserve(t_grid.size());
  out.push_back({t_grid[0], x0, xdot0});
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    y = rk4_step(rhs, t_grid[i - 1], y, t_grid[i] - t_grid[i - 1]);
    if (!y.allFinite()) throw NonFinite("extended trajectory overflowed at t = " + std::to_string(t_grid[i]));
    out.push_back({t_grid[i], y.head(2 * n), y.tail(2 * n)});
  }
  return out;
}

}  // namespace qpm
