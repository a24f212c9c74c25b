// Shared generators and oracles for the test suite.
#pragma once

#include <cmath>
#include <complex>
#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qpm/qpm.hpp"

namespace qpm::testing {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }
  cd complex(double r) { return {uniform(-r, r), uniform(-r, r)}; }

  RMat real_matrix(Eigen::Index r, Eigen::Index c, double a) {
    RMat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(-a, a);
    return m;
  }
  Mat complex_matrix(Eigen::Index r, Eigen::Index c, double a) {
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = complex(a);
    return m;
  }
  Vec complex_vector(Eigen::Index n, double a) { return complex_matrix(n, 1, a).col(0); }
  RVec real_vector(Eigen::Index n, double a) { return real_matrix(n, 1, a).col(0); }
};

// Charge sources with random positions and unit covariances; K and Γ left to the caller.
inline MediumSpec skeleton(Gen& g, Eigen::Index n) {
  MediumSpec s;
  s.n = n;
  s.coords = g.real_matrix(3, n, 4.0);
  s.covariances.assign(static_cast<std::size_t>(n), Eigen::Matrix3d::Identity());
  s.source_kind.assign(static_cast<std::size_t>(n), SourceKind::charge);
  s.gen_coord_vector = s.coords.row(2).transpose();
  s.kernel = Mat::Identity(n, n);
  s.damping = Mat::Zero(n, n);
  return s;
}

inline MediumSpec scalar_spec(cd k, cd gamma) {
  MediumSpec s;
  s.n = 1;
  s.coords = RMat::Zero(3, 1);
  s.coords(2, 0) = 1.0;
  s.covariances.assign(1, Eigen::Matrix3d::Identity());
  s.source_kind.assign(1, SourceKind::charge);
  s.gen_coord_vector = RVec::Ones(1);
  s.kernel = Mat::Constant(1, 1, k);
  s.damping = Mat::Constant(1, 1, gamma);
  return s;
}

// General complex K and Γ, mildly non-normal.
inline MediumSpec random_general_spec(Gen& g, Eigen::Index n) {
  MediumSpec s = skeleton(g, n);
  const RMat a = g.real_matrix(n, n, 1.0);
  s.kernel = (0.5 * (a + a.transpose())).cast<cd>() + Mat::Identity(n, n) * static_cast<double>(n) +
             0.3 * g.complex_matrix(n, n, 1.0);
  s.damping = 0.05 * g.complex_matrix(n, n, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) s.damping(i, i) += g.uniform(0.02, 0.2);
  return s;
}

// Real symmetric positive K, Γ = 0.
inline MediumSpec random_hermitian_spec(Gen& g, Eigen::Index n) {
  MediumSpec s = skeleton(g, n);
  const RMat a = g.real_matrix(n, n, 1.0);
  RMat k = 0.3 * (a + a.transpose());
  k.diagonal().array() += 1.0 + static_cast<double>(n) * 0.6;
  s.kernel = k.cast<cd>();
  return s;
}

// |det M| / Π‖row‖ (Hadamard ratio, ≤ 1) with the determinant from Eigen LU.
inline double scaled_det(const Mat& m) {
  Eigen::PartialPivLU<Mat> lu(m);
  double log_det = 0.0;
  const Mat& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = std::abs(u(i, i));
    if (d == 0.0) return 0.0;
    log_det += std::log(d);
    log_det -= std::log(std::max(m.row(i).norm(), 1e-300));
  }
  return std::exp(log_det);
}

inline Mat characteristic(const MediumSpec& s, cd w) {
  Mat q = -s.kernel + 2.0 * I_unit * w * s.damping;
  q.diagonal().array() += w * w;
  return q;
}

// Greedy multiset match; returns the worst distance.
inline double multiset_distance(std::vector<cd> a, std::vector<cd> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (cd x : a) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j)
      if (std::abs(b[j] - x) < bd) {
        bd = std::abs(b[j] - x);
        best = j;
      }
    worst = std::max(worst, bd);
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return worst;
}

inline std::vector<cd> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Composite Simpson on [a, b] with an even number of panels.
inline Mat simpson(const std::function<Mat(double)>& f, double a, double b, long panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  Mat acc = f(a) + f(b);
  for (long i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return acc * (h / 3.0);
}

// Single-mode ladder operators on a truncated Fock space.
inline Mat annihilation(int cutoff) {
  Mat a = Mat::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Two-mode Fock model of the Γ = 0, n = 1 medium in the A = I gauge:
// operators q = [π_u, π_v, u, v] as matrices, H diagonal.
struct FockModel {
  std::vector<Mat> q;
  RVec energies;
};

inline FockModel fock_model(double omega, double hbar, int cutoff) {
  const Mat a = annihilation(cutoff);
  const Mat id = Mat::Identity(cutoff, cutoff);
  const Mat x = std::sqrt(hbar / (2.0 * omega)) * (a + a.adjoint());
  const Mat p = I_unit * std::sqrt(hbar * omega / 2.0) * (a.adjoint() - a);
  FockModel m;
  m.q = {kron(p, id), kron(id, p), kron(x, id), kron(id, x)};
  m.energies.resize(cutoff * cutoff);
  for (int i = 0; i < cutoff; ++i)
    for (int j = 0; j < cutoff; ++j) m.energies(i * cutoff + j) = hbar * omega * (i + j + 1.0);
  return m;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline Mat random_hermitian(Gen& g, Eigen::Index d) {
  const Mat a = g.complex_matrix(d, d, 1.0);
  return 0.5 * (a + a.adjoint());
}

inline Mat random_density(Gen& g, Eigen::Index d) {
  const Mat a = g.complex_matrix(d, d, 1.0);
  const Mat r = a * a.adjoint();
  return r / r.trace();
}

// Symmetric covariance and random mean on 2N canonical coordinates.
inline GaussianState random_state(Gen& g, Eigen::Index N, double hbar) {
  const Mat a = g.complex_matrix(2 * N, 2 * N, 0.5);
  GaussianState s;
  s.hbar = hbar;
  s.cov = a * a.transpose() + Mat::Identity(2 * N, 2 * N);
  s.mean = g.complex_vector(2 * N, 0.5);
  return s;
}

// Scalar medium with Γ > √K.
inline MediumSpec overdamped_spec(Gen& g) {
  const double k = g.uniform(0.3, 2.0);
  const double gamma = std::sqrt(k) * g.uniform(1.1, 2.5);
  return scalar_spec(k, gamma);
}

// ∫ψ*φ d²x on a tensor trapezoid grid, n = 1 only.
inline cd bicoherent_overlap(const BiCoherentParams& p, int points = 401) {
  const Mat Q = p.sigma_inv.conjugate();
  const Vec mb = p.mu_vec.conjugate();
  const double width = 12.0 / std::sqrt(p.min_real_curvature);
  const double cx = p.eff_mu(0).real(), cy = p.eff_mu(1).real();
  const double h = 2.0 * width / (points - 1);
  cd acc = 0.0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      Vec x(2);
      x << cx - width + h * i, cy - width + h * j;
      const Vec a = x - mb, b = x - p.mu_prime;
      const cd e = 0.5 * (a.transpose() * Q * a)(0) + 0.5 * (b.transpose() * Q * b)(0);
      acc += std::exp(p.log_norm_product + e);
    }
  return acc * h * h;
}

// Worst distance between ħ(Σ n_k μ_k + ½Σμ) and the exact spectrum of the n = 1
// quadratic Hamiltonian ½πᵀAπ + ½xᵀA⁻¹𝒦x diagonalized on a truncated Fock space.
inline double fock_level_error(const Prepared& p, double hbar, int cutoff) {
  const Mat& A = p.ext.sim_A;
  const Mat V = p.ext.sim_A_inv * p.ext.kappa;
  const Mat a = annihilation(cutoff), id = Mat::Identity(cutoff, cutoff);
  std::vector<Mat> xs, ps;
  for (int mode = 0; mode < 2; ++mode) {
    const double ell = std::pow(std::abs(A(mode, mode) / V(mode, mode)), 0.25) * std::sqrt(hbar);
    const Mat x = ell / std::sqrt(2.0) * (a + a.adjoint());
    const Mat pi = I_unit * hbar / (ell * std::sqrt(2.0)) * (a.adjoint() - a);
    xs.push_back(mode == 0 ? kron(x, id) : kron(id, x));
    ps.push_back(mode == 0 ? kron(pi, id) : kron(id, pi));
  }
  Mat H = Mat::Zero(cutoff * cutoff, cutoff * cutoff);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) H += 0.5 * A(i, j) * ps[i] * ps[j] + 0.5 * V(i, j) * xs[i] * xs[j];
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  std::vector<double> found(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  const auto b = build_pseudoboson(p.eig, hbar);
  double worst = 0.0;
  for (int n1 = 0; n1 < cutoff - 1; ++n1)
    for (int n2 = 0; n2 < cutoff - 1; ++n2) {
      const cd level = hbar * (double(n1) * b.sqrtJK(0) + double(n2) * b.sqrtJK(1) + 0.5 * b.sqrtJK.sum());
      auto it = std::min_element(found.begin(), found.end(),
                                 [&](double u, double v) { return std::abs(u - level) < std::abs(v - level); });
      worst = std::max(worst, std::abs(*it - level));
      found.erase(it);
    }
  return worst;
}

// Least-squares slope of log10 y against log10 x.
inline double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log10(x[i]);
    my += std::log10(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log10(x[i]) - mx) * (std::log10(y[i]) - my);
    den += (std::log10(x[i]) - mx) * (std::log10(x[i]) - mx);
  }
  return num / den;
}

// Classical-limit error max_ω |Ξ_ħ − Ξ_cl| for each ħ.
inline std::vector<double> classical_limit_errors(const ExtendedOperator& ext, double beta, const RVec& grid,
                                                  const std::vector<double>& hbars, double eta) {
  const auto cl = classical_correlation(ext, beta, grid, eta);
  std::vector<double> out;
  for (double hbar : hbars) {
    const auto q = thermal_correlation(ext, beta, hbar, grid, eta);
    double err = 0.0;
    for (std::size_t i = 0; i < q.Xi.size(); ++i) err = std::max(err, max_abs(q.Xi[i] - cl.Xi[i]));
    out.push_back(err);
  }
  return out;
}

// ∫₀^T Ξ(t) e^{(iω−η)t} dt against the resolvent route, x-block only.
inline double time_quadrature_error(const Prepared& p, const GaussianState& s, double w, double eta) {
  const SymplecticFlow flow(p.ext);
  const double growth = (p.ext.gen_JB.eigenvalues().real() * -1.0).maxCoeff();
  const double rate = eta - std::max(growth, 0.0);
  if (!(rate > 0.1)) return std::numeric_limits<double>::infinity();
  const double T = 40.0 / rate;
  const Mat integral =
      simpson([&](double t) { return Mat(correlation_time(flow, s, t) * std::exp(cd(-eta, w) * t)); }, 0.0, T, 20000);
  const auto c = correlation_frequency(p.ext, s, RVec::Constant(1, w), eta);
  const Eigen::Index N = p.ext.N();
  return max_abs(integral.bottomRightCorner(N, N) - c.Xi[0]);
}

// Random system coupled to a random two-source medium at β = ħ = 1.
struct Bath {
  Prepared p;
  SystemCoupling sys;
  BohrDecomposition bohr;
  CorrelationSet corr;
};

inline Bath random_bath(Gen& g, Eigen::Index d) {
  Bath b{prepare(random_general_spec(g, 2)), {}, {}, {}};
  b.sys.H_S = random_hermitian(g, d);
  b.sys.hbar = 1.0;
  b.sys.A_ops = {random_hermitian(g, d), random_hermitian(g, d)};
  b.bohr = bohr_decompose(b.sys, &b.p.ext);
  const double span = std::max(std::abs(b.bohr.frequencies.front()), b.bohr.frequencies.back());
  b.corr = thermal_correlation(b.p.ext, 1.0, 1.0, RVec::LinSpaced(201, -span - 0.1, span + 0.1), 1e-2);
  return b;
}

// ‖ΛJΛᵀ − J‖ relative to max(1, ‖Λ‖²).
inline double symplectic_residual(const Mat& L) {
  const Mat J = symplectic_J(L.rows() / 2);
  return (L * J * L.transpose() - J).norm() / std::max(1.0, L.norm() * L.norm());
}

}  // namespace qpm::testing
