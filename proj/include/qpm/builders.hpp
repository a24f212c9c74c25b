// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qpm/constants.hpp"
#include "qpm/spectral.hpp"

namespace qpm {

struct Atom {
  std::string element;
  Eigen::Vector3d position;  // Å
};

struct GeometryFile {
  std::vector<Atom> atoms;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

inline bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

// Portable uniform [0, 1) from a 64-bit engine.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double normal(std::mt19937_64& rng) {
  double u = u01(rng);
  while (u <= 0.0) u = u01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * constants::pi * u01(rng));
}

}  // namespace detail

inline GeometryFile parse_xyz(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw MalformedXYZ("line 1: missing atom count");
  const auto head = detail::split_ws(line);
  long count = -1;
  try {
    std::size_t used = 0;
    if (head.size() == 1) count = std::stol(head[0], &used);
    if (used != head[0].size()) count = -1;
  } catch (...) {
    count = -1;
  }
  if (count < 1) throw MalformedXYZ("line 1: expected a positive atom count");
  if (!std::getline(is, line)) throw CountMismatch("expected " + std::to_string(count) + " atoms, found 0");
  GeometryFile g;
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (static_cast<long>(g.atoms.size()) == count)
      throw CountMismatch("count line says " + std::to_string(count) + " but more rows follow (line " +
                          std::to_string(lineno) + ")");
    if (tok.size() < 4) throw MalformedXYZ("line " + std::to_string(lineno) + ": expected `El x y z`");
    Atom a;
    a.element = tok[0];
    for (int j = 0; j < 3; ++j)
      if (!detail::parse_double(tok[static_cast<std::size_t>(j + 1)], a.position(j)))
        throw MalformedXYZ("line " + std::to_string(lineno) + ": bad coordinate `" +
                           tok[static_cast<std::size_t>(j + 1)] + "`");
    g.atoms.push_back(a);
  }
  if (static_cast<long>(g.atoms.size()) != count)
    throw CountMismatch("count line says " + std::to_string(count) + " but " + std::to_string(g.atoms.size()) +
                        " rows found");
  return g;
}

inline GeometryFile parse_xyz_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedXYZ("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_xyz(ss.str());
}

inline std::string to_xyz(const GeometryFile& g, const std::string& comment = "") {
  std::ostringstream os;
  os.precision(12);
  os << g.atoms.size() << "\n" << comment << "\n";
  for (const auto& a : g.atoms)
    os << a.element << " " << a.position.x() << " " << a.position.y() << " " << a.position.z() << "\n";
  return os.str();
}

// Lengths in bohr, rates in Hartree.
struct DrudeParams {
  double drude_factor = 0.0;
  double relaxation = 0.0;
  double gaussian_width = 1.0;
  struct Tunneling {
    bool enabled = false;
    double d0 = 1.0;
    double steepness = 1.0;
  } tunneling;

  void validate() const {
    if (!(gaussian_width > 0.0)) throw InvalidSpec("gaussian_width must be positive");
    if (!(drude_factor >= 0.0) || !(relaxation >= 0.0)) throw InvalidSpec("rates must be non-negative");
    if (tunneling.enabled && !(tunneling.d0 > 0.0)) throw InvalidSpec("tunneling d0 must be positive");
  }
};

inline RMat geometry_bohr(const GeometryFile& g) {
  RMat c(3, static_cast<Eigen::Index>(g.atoms.size()));
  for (std::size_t i = 0; i < g.atoms.size(); ++i)
    c.col(static_cast<Eigen::Index>(i)) = g.atoms[i].position * constants::angstrom_bohr;
  return c;
}

// Gaussian-damped Coulomb kernel.
inline RMat coulomb_kernel(const RMat& coords, double s) {
  const Eigen::Index n = coords.cols();
  RMat t(n, n);
  const double self = 2.0 / (s * std::sqrt(2.0 * constants::pi));
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, i) = self;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (coords.col(i) - coords.col(j)).norm();
      if (d == 0.0) throw CoincidentAtoms("atoms " + std::to_string(i) + " and " + std::to_string(j));
      t(i, j) = t(j, i) = std::erf(d / (s * std::sqrt(2.0))) / d;
    }
  }
  return t;
}

// Charge-transfer operator: links weighted by 1/d, optionally gated by 1 − Fermi(d).
inline RMat drude_tunneling_operator(const RMat& coords, const DrudeParams& p) {
  const Eigen::Index n = coords.cols();
  RMat k = RMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (coords.col(i) - coords.col(j)).norm();
      if (d == 0.0) throw CoincidentAtoms("atoms " + std::to_string(i) + " and " + std::to_string(j));
      double w = 1.0 / d;
      if (p.tunneling.enabled)
        w *= 1.0 - 1.0 / (1.0 + std::exp(-p.tunneling.steepness * (d / p.tunneling.d0 - 1.0)));
      k(i, j) = k(j, i) = p.drude_factor * w;
    }
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) = -k.row(i).sum();
  return k;
}

struct DrudeModel {
  MediumSpec spec;
  RMat tunneling_operator;  // K^{D−T}
  RMat coulomb;             // T^{qq}
  RVec kick;                // f for a unit field along the chosen axis
};

// K = −K^{D−T}T, Γ = relaxation/2, f = K^{D−T}R_axis.
inline DrudeModel build_drude_model(const GeometryFile& geom, const DrudeParams& params, int axis = 2) {
  params.validate();
  if (geom.atoms.empty()) throw InvalidSpec("geometry has no atoms");
  DrudeModel m;
  const RMat coords = geometry_bohr(geom);
  const Eigen::Index n = coords.cols();
  m.coulomb = coulomb_kernel(coords, params.gaussian_width);
  m.tunneling_operator = drude_tunneling_operator(coords, params);
  auto& s = m.spec;
  s.n = n;
  s.coords = coords;
  s.covariances.assign(static_cast<std::size_t>(n),
                       Eigen::Matrix3d::Identity() * params.gaussian_width * params.gaussian_width);
  s.kernel = (-m.tunneling_operator * m.coulomb).cast<cd>();
  s.damping = Mat::Identity(n, n) * (0.5 * params.relaxation);
  s.source_kind.assign(static_cast<std::size_t>(n), SourceKind::charge);
  s.gen_coord_vector = make_gen_coord_vector(coords, s.source_kind, axis);
  m.kick = m.tunneling_operator * coords.row(axis).transpose();
  return m;
}

inline MediumSpec build_drude_charge_model(const GeometryFile& geom, const DrudeParams& params) {
  return build_drude_model(geom, params).spec;
}

enum class Stability { stable, marginal };

// Symmetric diagonally dominant K plus a small non-symmetric part, Γ ≥ 0 diagonal.
inline MediumSpec build_synthetic(Eigen::Index n, std::uint64_t seed, Stability stability = Stability::stable) {
  if (n < 1) throw InvalidSpec("n must be at least 1");
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return a + (b - a) * detail::u01(rng); };
  MediumSpec s;
  s.n = n;
  s.coords.resize(3, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (int j = 0; j < 3; ++j) s.coords(j, b) = uni(-5.0, 5.0);
  s.covariances.assign(static_cast<std::size_t>(n), Eigen::Matrix3d::Identity());
  s.source_kind.assign(static_cast<std::size_t>(n), SourceKind::charge);
  s.gen_coord_vector = make_gen_coord_vector(s.coords, s.source_kind, 2);
  RMat sym(n, n), pert(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) pert(i, j) = uni(-1.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) sym(i, j) = sym(j, i) = uni(-0.3, 0.3);
    sym(i, i) = 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) sym(i, i) = uni(0.5, 2.0) + sym.row(i).cwiseAbs().sum();
  RVec gamma(n);
  for (Eigen::Index i = 0; i < n; ++i) gamma(i) = uni(0.02, 0.2);
  if (stability == Stability::marginal) {
    s.kernel = sym.cast<cd>();
    s.damping = Mat::Zero(n, n);
    return s;
  }
  s.damping = gamma.cast<cd>().asDiagonal();
  for (double eps = 0.05; eps > 1e-6; eps *= 0.5) {
    s.kernel = (sym + eps * pert).cast<cd>();
    const auto e = eigendecompose(build_sqrt_kappa(s), SpectralOptions{1e8, 1e12, false});
    if ((-e.values).imag().maxCoeff() <= 1e-12) return s;
  }
  s.kernel = sym.cast<cd>();
  return s;
}

inline GeometryFile perturb_geometry(const GeometryFile& geom, double max_displacement, std::uint64_t seed,
                                     const std::optional<Eigen::Vector3d>& plane_normal = {}) {
  if (max_displacement < 0.0) throw InvalidSpec("max_displacement must be non-negative");
  GeometryFile out = geom;
  if (max_displacement == 0.0) return out;
  std::mt19937_64 rng(seed);
  Eigen::Vector3d e1, e2;
  if (plane_normal) {
    const Eigen::Vector3d nrm = plane_normal->normalized();
    e1 = nrm.unitOrthogonal();
    e2 = nrm.cross(e1).normalized();
  }
  for (auto& a : out.atoms) {
    Eigen::Vector3d d;
    do {
      if (plane_normal) {
        const double x = 2.0 * detail::u01(rng) - 1.0, y = 2.0 * detail::u01(rng) - 1.0;
        d = x * e1 + y * e2;
        if (x * x + y * y > 1.0) d.setConstant(2.0);
      } else {
        for (int j = 0; j < 3; ++j) d(j) = 2.0 * detail::u01(rng) - 1.0;
      }
    } while (d.squaredNorm() > 1.0);
    a.position += max_displacement * d;
  }
  return out;
}

// Planar hexagonal patch: the `count` lattice sites closest to the origin (spacing in Å).
inline GeometryFile make_disk_geometry(std::size_t count, double spacing, const std::string& element = "C") {
  const int span = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) + 2;
  std::vector<Eigen::Vector3d> sites;
  for (int i = -span; i <= span; ++i)
    for (int j = -span; j <= span; ++j)
      sites.emplace_back(spacing * (i + 0.5 * j), spacing * (std::sqrt(3.0) / 2.0) * j, 0.0);
  std::stable_sort(sites.begin(), sites.end(), [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    if (a.squaredNorm() != b.squaredNorm()) return a.squaredNorm() < b.squaredNorm();
    if (a.x() != b.x()) return a.x() < b.x();
    return a.y() < b.y();
  });
  GeometryFile g;
  for (std::size_t i = 0; i < count && i < sites.size(); ++i) g.atoms.push_back({element, sites[i]});
  return g;
}

}  // namespace qpm
