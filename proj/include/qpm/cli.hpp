// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qpm/io.hpp"
#include "qpm/openquantum.hpp"
#include "qpm/response.hpp"

namespace qpm::cli {

enum class Subcommand { build, spectrum, modes, filter, propagate, field, bath };

inline const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::build: return "build";
    case Subcommand::spectrum: return "spectrum";
    case Subcommand::modes: return "modes";
    case Subcommand::filter: return "filter";
    case Subcommand::propagate: return "propagate";
    case Subcommand::field: return "field";
    case Subcommand::bath: return "bath";
  }
  return "?";
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Energies in eV, lengths in bohr, times in atomic units.
struct RunConfig {
  Subcommand subcommand = Subcommand::spectrum;
  std::string model_path;
  std::string out_path;

  double omega_min = 0.0;
  double omega_max = 0.0;
  double omega_step = 0.0;

  std::string method = "modes";  // spectrum: modes | direct
  std::string gauge = "sqrt_kappa";
  std::string svg_path;
  std::string vectors_path;  // modes
  std::string reduced_path;  // filter

  std::string filter_mode = "if";
  double threshold = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;

  std::optional<double> beta;  // 1/eV
  double hbar = 1.0;
  double eta = 1e-4 * constants::hartree_eV;  // eV

  // build
  std::string xyz_path;
  std::string params_path;
  int axis = 2;
  long synthetic_n = 0;
  bool marginal = false;
  long disk_count = 0;
  double disk_spacing = 2.89;
  double displace = 0.0;
  std::uint64_t seed = 1;

  // propagate
  double t_max = 10.0;
  double dt = 0.01;
  std::string cov_prefix;

  // field
  std::vector<std::array<double, 3>> k_query;
  std::array<double, 3> incident_k{0.0, 0.0, 0.0};
  std::array<double, 3> polarization{0.0, 0.0, 1.0};
  int iterations = 0;

  void validate() const {
    if (out_path.empty()) throw UsageError("--out must be a non-empty path");
    const bool needs_model = subcommand != Subcommand::build;
    if (needs_model && model_path.empty()) throw UsageError("--model must be a non-empty path");
    const bool needs_grid = subcommand == Subcommand::spectrum || subcommand == Subcommand::field ||
                            subcommand == Subcommand::bath ||
                            (subcommand == Subcommand::filter &&
                             (omega_step != 0.0 || !reduced_path.empty() || !svg_path.empty()));
    if (needs_grid) {
      if (!(omega_step > 0.0)) throw UsageError("--omega-step must be positive");
      if (!(omega_max >= omega_min)) throw UsageError("--omega-max must not be below --omega-min");
    }
    if (method != "modes" && method != "direct") throw UsageError("--method must be modes or direct");
    if (gauge != "sqrt_kappa" && gauge != "symmetric") throw UsageError("--gauge must be sqrt_kappa or symmetric");
    if (filter_mode != "if" && filter_mode != "ef") throw UsageError("--mode must be if or ef");
    if (subcommand == Subcommand::filter && filter_mode == "if" && !(threshold >= 0.0))
      throw UsageError("--threshold must be non-negative");
    if (axis < 0 || axis > 2) throw UsageError("--axis must be x, y or z");
    if (subcommand == Subcommand::propagate && (!(dt > 0.0) || !(t_max >= 0.0)))
      throw UsageError("--dt must be positive and --t-max non-negative");
    if (subcommand == Subcommand::bath && !beta) throw UsageError("bath needs --beta");
    if (!(eta >= 0.0)) throw UsageError("--eta must be non-negative");
    if (subcommand == Subcommand::build) {
      const int sources = (!xyz_path.empty()) + (synthetic_n > 0) + (disk_count > 0);
      if (sources != 1) throw UsageError("build needs exactly one of --xyz, --synthetic, --disk");
      if (synthetic_n <= 0 && params_path.empty()) throw UsageError("Drude builds need --params");
    }
  }
};

struct Outcome {
  std::vector<std::string> files;
  std::uint64_t checksum = 1469598103934665603ull;
  std::size_t rows = 0;
  std::string note;
};

namespace detail {

inline std::string unit_header() { return "hartree_eV=" + io::fmt(constants::hartree_eV); }

inline void emit(Outcome& o, const std::string& path, const std::string& text) {
  io::write_text(path, text);
  o.files.push_back(path);
  o.checksum = io::checksum(text, o.checksum);
}

inline RVec grid_hartree(const RunConfig& c) {
  const RVec ev = frequency_grid(c.omega_min, c.omega_max, c.omega_step);
  return ev / constants::hartree_eV;
}

inline double to_ev(double h) { return h * constants::hartree_eV; }

inline Prepared prepare_model(const RunConfig& c, const MediumSpec& spec) {
  return prepare(spec, c.gauge == "symmetric" ? Basis::symmetric_kappa : Basis::sqrt_kappa);
}

// Im α, absorptive and dispersive columns against ω in eV.
inline std::string svg_plot(const SpectrumTable& t) {
  const double w = 640, h = 400, pad = 40;
  const RVec x = t.omega_grid * constants::hartree_eV;
  std::vector<std::pair<const RVec*, const char*>> series{{&t.im_alpha, "#000000"}};
  if (t.absorptive.size()) series.push_back({&t.absorptive, "#c03030"});
  if (t.dispersive.size()) series.push_back({&t.dispersive, "#3050c0"});
  double lo = 0.0, hi = 0.0;
  for (auto& s : series) {
    lo = std::min(lo, s.first->minCoeff());
    hi = std::max(hi, s.first->maxCoeff());
  }
  if (hi == lo) hi = lo + 1.0;
  const double x0 = x(0), x1 = x.size() > 1 ? x(x.size() - 1) : x0 + 1.0;
  auto px = [&](double v) { return pad + (v - x0) / (x1 - x0) * (w - 2 * pad); };
  auto py = [&](double v) { return h - pad - (v - lo) / (hi - lo) * (h - 2 * pad); };
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
  out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  char buf[96];
  for (auto& s : series) {
    out += "<polyline fill=\"none\" stroke=\"" + std::string(s.second) + "\" points=\"";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x(i)), py((*s.first)(i)));
      out += buf;
    }
    out += "\"/>\n";
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\">omega (eV)</text>\n", w / 2, h - 10);
  out += buf;
  out += "</svg>\n";
  return out;
}

inline std::string spectrum_csv(const SpectrumTable& t) {
  io::CsvWriter csv(unit_header());
  csv.header("omega_eV", "im_alpha", "absorptive", "dispersive");
  const bool split = t.absorptive.size() == t.omega_grid.size();
  for (Eigen::Index i = 0; i < t.omega_grid.size(); ++i) {
    if (split)
      csv.row({to_ev(t.omega_grid(i)), t.im_alpha(i), t.absorptive(i), t.dispersive(i)});
    else
      csv.row_strings({io::fmt(to_ev(t.omega_grid(i))), io::fmt(t.im_alpha(i)), "", ""});
  }
  return csv.str();
}

inline ModeLedger ledger_for(const io::Model& m, const Prepared& p) {
  return decompose_modes(p.eig, m.spec, Kick{m.kick_or_default()});
}

inline Vec3 as_vec(const std::array<double, 3>& a) { return Vec3(a[0], a[1], a[2]); }

}  // namespace detail

inline Outcome run_build(const RunConfig& c) {
  Outcome o;
  if (c.synthetic_n > 0) {
    const MediumSpec s = build_synthetic(c.synthetic_n, c.seed, c.marginal ? Stability::marginal : Stability::stable);
    detail::emit(o, c.out_path, io::dump(io::model_to_json(s)));
    o.rows = static_cast<std::size_t>(s.n);
    return o;
  }
  const DrudeParams params = io::read_drude_params(c.params_path);
  GeometryFile geom = c.disk_count > 0 ? make_disk_geometry(static_cast<std::size_t>(c.disk_count), c.disk_spacing)
                                       : parse_xyz_file(c.xyz_path);
  if (c.displace > 0.0) {
    std::optional<Eigen::Vector3d> normal;
    if (c.disk_count > 0) normal = Eigen::Vector3d::UnitZ();
    geom = perturb_geometry(geom, c.displace, c.seed, normal);
  }
  const DrudeModel m = build_drude_model(geom, params, c.axis);
  detail::emit(o, c.out_path, io::dump(io::model_to_json(m.spec, m.kick)));
  o.rows = static_cast<std::size_t>(m.spec.n);
  return o;
}

inline Outcome run_spectrum(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const RVec grid = detail::grid_hartree(c);
  SpectrumTable t;
  if (c.method == "direct") {
    t = polarizability_direct(m.spec, Kick{m.kick_or_default()}, grid);
  } else {
    const Prepared p = detail::prepare_model(c, m.spec);
    const ModeLedger l = detail::ledger_for(m, p);
    t = reconstruct_spectrum(l, all_modes(l), grid);
  }
  detail::emit(o, c.out_path, detail::spectrum_csv(t));
  if (!c.svg_path.empty()) detail::emit(o, c.svg_path, detail::svg_plot(t));
  o.rows = static_cast<std::size_t>(grid.size());
  return o;
}

inline Outcome run_modes(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const Prepared p = detail::prepare_model(c, m.spec);
  io::CsvWriter csv(detail::unit_header());
  csv.header("k", "re_mu", "im_mu");
  for (Eigen::Index k = 0; k < p.eig.values.size(); ++k)
    csv.row_strings({std::to_string(k + 1), io::fmt(detail::to_ev(p.eig.values(k).real())),
                     io::fmt(detail::to_ev(p.eig.values(k).imag()))});
  detail::emit(o, c.out_path, csv.str());
  if (!c.vectors_path.empty()) {
    // column k of P₁ per line as re im pairs
    std::string text = "# eigenvectors of sqrt_kappa, one per line, row-major re im pairs; basis=" +
                       std::string(basis_name(p.eig.basis)) + "\n";
    const Mat& v = p.eig.right_vectors;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      for (Eigen::Index i = 0; i < v.rows(); ++i)
        text += (i ? " " : "") + io::fmt(v(i, k).real()) + " " + io::fmt(v(i, k).imag());
      text += "\n";
    }
    detail::emit(o, c.vectors_path, text);
  }
  o.rows = static_cast<std::size_t>(p.eig.values.size());
  return o;
}

inline Outcome run_filter(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const Prepared p = detail::prepare_model(c, m.spec);
  const ModeLedger l = detail::ledger_for(m, p);
  const IndexSet sel = c.filter_mode == "if"
                           ? filter_intercept(l, c.threshold)
                           : filter_eigenvalue(l, constants::eV_to_hartree(c.window_min),
                                               constants::eV_to_hartree(c.window_max));
  std::vector<char> chosen(static_cast<std::size_t>(l.size()), 0);
  for (auto k : sel) chosen[static_cast<std::size_t>(k)] = 1;
  io::CsvWriter csv(detail::unit_header());
  csv.header("k", "re_mu_eV", "im_mu_eV", "re_I", "selected");
  for (Eigen::Index k = 0; k < l.size(); ++k)
    csv.row_strings({std::to_string(k + 1), io::fmt(detail::to_ev(l.mu(k).real())), io::fmt(detail::to_ev(l.mu(k).imag())),
                     io::fmt(l.intercept(k).real()), chosen[static_cast<std::size_t>(k)] ? "1" : "0"});
  detail::emit(o, c.out_path, csv.str());
  o.rows = static_cast<std::size_t>(l.size());
  o.note = "selected=" + std::to_string(sel.size());
  if (c.omega_step == 0.0) return o;
  const RVec grid = detail::grid_hartree(c);
  const SpectrumTable full = reconstruct_spectrum(l, all_modes(l), grid);
  const SpectrumTable red = reconstruct_spectrum(l, sel, grid);
  if (!c.reduced_path.empty()) detail::emit(o, c.reduced_path, detail::spectrum_csv(red));
  if (!c.svg_path.empty()) detail::emit(o, c.svg_path, detail::svg_plot(red));
  o.note += " rel_l2=" + io::fmt(relative_l2(red.im_alpha, full.im_alpha));
  return o;
}

inline Outcome run_propagate(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const Prepared p = detail::prepare_model(c, m.spec);
  const Eigen::Index n = m.spec.n, N = 2 * n;
  const DriveSignal drive = Kick{m.kick_or_default()};
  Mat cov0;
  if (c.beta) cov0 = thermal_state(p.ext, *c.beta * constants::hartree_eV, c.hbar).cov;
  const Vec zero = Vec::Zero(N);
  const GaussianState s0 = state_from_classical(p.ext, zero, consistent_xdot0(m.spec, drive, Vec::Zero(n), Vec::Zero(n), 0.0),
                                                cov0, c.hbar);
  const std::vector<double> grid = uniform_grid(0.0, c.t_max, c.dt);
  const bool dump_cov = !c.cov_prefix.empty();
  const auto traj = propagate_trajectory(p.ext, s0, drive, grid, dump_cov);
  io::CsvWriter csv(detail::unit_header() + " time=atomic basis=" + basis_name(p.eig.basis));
  std::vector<std::string> head{"t"};
  for (const char* block : {"u", "v"})
    for (Eigen::Index i = 1; i <= n; ++i) {
      head.push_back(std::string("re_") + block + "_" + std::to_string(i));
      head.push_back(std::string("im_") + block + "_" + std::to_string(i));
    }
  csv.row_strings(head);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    std::vector<double> row{grid[s]};
    const Vec x = traj[s].mean.tail(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      row.push_back(x(i).real());
      row.push_back(x(i).imag());
    }
    csv.row(row);
    if (dump_cov) {
      io::CsvWriter cv("t=" + io::fmt(grid[s]) + " row-major re im pairs, q=[pi_u,pi_v,u,v]");
      const Mat& M = traj[s].cov;
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        std::vector<double> r;
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
          r.push_back(M(i, j).real());
          r.push_back(M(i, j).imag());
        }
        cv.row(r);
      }
      detail::emit(o, c.cov_prefix + std::to_string(s) + ".csv", cv.str());
    }
  }
  detail::emit(o, c.out_path, csv.str());
  o.rows = traj.size();
  return o;
}

inline Outcome run_field(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const Prepared p = detail::prepare_model(c, m.spec);
  const RVec grid = detail::grid_hartree(c);
  FieldPlaneWaveSet waves;
  PlaneWave pw;
  pw.k = detail::as_vec(c.incident_k);
  pw.amplitude.assign(static_cast<std::size_t>(grid.size()), detail::as_vec(c.polarization).cast<cd>());
  waves.waves.push_back(pw);
  std::vector<Vec3> ks;
  for (const auto& k : c.k_query) ks.push_back(detail::as_vec(k));
  if (ks.empty()) ks.push_back(Vec3(0.0, 0.0, 0.1));
  const EmittedField f = emitted_field_first_order(p.ext, m.spec, waves, ks, grid);
  io::CsvWriter csv(detail::unit_header() + " gauge=" + basis_name(p.ext.gauge));
  csv.header("omega_eV", "kx", "ky", "kz", "re_Ex", "im_Ex", "re_Ey", "im_Ey", "re_Ez", "im_Ez");
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    for (std::size_t q = 0; q < ks.size(); ++q) {
      const CVec3& e = f.values[static_cast<std::size_t>(i)][q];
      csv.row({detail::to_ev(grid(i)), ks[q](0), ks[q](1), ks[q](2), e(0).real(), e(0).imag(), e(1).real(),
               e(1).imag(), e(2).real(), e(2).imag()});
    }
  detail::emit(o, c.out_path, csv.str());
  io::CsvWriter side("plane-wave delta terms, amplitude constant on the grid");
  side.header("wave", "kx", "ky", "kz", "re_Ex", "im_Ex", "re_Ey", "im_Ey", "re_Ez", "im_Ez");
  for (std::size_t w = 0; w < waves.waves.size(); ++w) {
    const auto& a = waves.waves[w].amplitude.empty() ? CVec3::Zero().eval() : waves.waves[w].amplitude.front();
    const Vec3& k = waves.waves[w].k;
    side.row({static_cast<double>(w), k(0), k(1), k(2), a(0).real(), a(0).imag(), a(1).real(), a(1).imag(),
              a(2).real(), a(2).imag()});
  }
  detail::emit(o, c.out_path + ".planewaves.csv", side.str());
  o.rows = static_cast<std::size_t>(grid.size()) * ks.size();
  return o;
}

inline Outcome run_bath(const RunConfig& c) {
  Outcome o;
  const io::Model m = io::read_model(c.model_path);
  const Prepared p = detail::prepare_model(c, m.spec);
  const RVec grid = detail::grid_hartree(c);
  const double beta = *c.beta * constants::hartree_eV;
  const CorrelationSet corr = thermal_correlation(p.ext, beta, c.hbar, grid, constants::eV_to_hartree(c.eta));
  io::CsvWriter csv(detail::unit_header() + " gauge=" + basis_name(p.ext.gauge));
  csv.header("omega_eV", "alpha", "beta", "re_gamma", "im_gamma", "re_S", "im_S");
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Mat& g = corr.gamma[static_cast<std::size_t>(i)];
    const Mat& s = corr.S_ls[static_cast<std::size_t>(i)];
    worst = std::min(worst, min_gamma_eigenvalue(g));
    for (Eigen::Index a = 0; a < g.rows(); ++a)
      for (Eigen::Index b = 0; b < g.cols(); ++b)
        csv.row_strings({io::fmt(detail::to_ev(grid(i))), std::to_string(a + 1), std::to_string(b + 1),
                         io::fmt(g(a, b).real()), io::fmt(g(a, b).imag()), io::fmt(s(a, b).real()),
                         io::fmt(s(a, b).imag())});
  }
  detail::emit(o, c.out_path, csv.str());
  o.rows = static_cast<std::size_t>(grid.size() * p.ext.N() * p.ext.N());
  o.note = "min_gamma_eig=" + io::fmt(worst);
  return o;
}

// 0 on success, 1 on a module error, 2 on a usage error.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    c.validate();
    Outcome o;
    switch (c.subcommand) {
      case Subcommand::build: o = run_build(c); break;
      case Subcommand::spectrum: o = run_spectrum(c); break;
      case Subcommand::modes: o = run_modes(c); break;
      case Subcommand::filter: o = run_filter(c); break;
      case Subcommand::propagate: o = run_propagate(c); break;
      case Subcommand::field: o = run_field(c); break;
      case Subcommand::bath: o = run_bath(c); break;
    }
    char sum[20];
    std::snprintf(sum, sizeof sum, "%016" PRIx64, o.checksum);
    out << "qpm " << subcommand_name(c.subcommand) << ": rows=" << o.rows << " files=" << o.files.size()
        << " checksum=" << sum;
    if (!o.note.empty()) out << " " << o.note;
    out << "\n";
    return 0;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qpm::cli
