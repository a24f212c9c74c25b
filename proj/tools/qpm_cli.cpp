// SPDX-License-Identifier: Apache-2.0
// Batch front-end: qpm <subcommand> [options]
#include <CLI11.hpp>

#include "qpm/cli.hpp"

namespace {

using qpm::cli::RunConfig;
using qpm::cli::Subcommand;

std::array<double, 3> parse_triple(const std::string& s) {
  std::array<double, 3> v{};
  std::stringstream in(s);
  std::string tok;
  std::size_t i = 0;
  while (std::getline(in, tok, ',')) {
    if (i == 3) throw CLI::ValidationError("expected three comma-separated numbers: " + s);
    v[i++] = std::stod(tok);
  }
  if (i != 3) throw CLI::ValidationError("expected three comma-separated numbers: " + s);
  return v;
}

void model_io(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model_path, "model file (JSON)")->required();
  sub->add_option("--out", c.out_path, "output CSV")->required();
  sub->add_option("--gauge", c.gauge, "sqrt_kappa | symmetric");
}

void window(CLI::App* sub, RunConfig& c, bool required = true) {
  sub->add_option("--omega-min", c.omega_min, "eV")->required(required);
  sub->add_option("--omega-max", c.omega_max, "eV")->required(required);
  sub->add_option("--omega-step", c.omega_step, "eV")->required(required);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum polarizable medium toolkit"};
  app.require_subcommand(1, 1);
  RunConfig c;
  std::string axis = "z";
  std::vector<std::string> k_query;
  std::string incident_k, polarization;
  double beta = 0.0;

  auto* build = app.add_subcommand("build", "assemble a model file");
  build->add_option("--xyz", c.xyz_path, "geometry (XYZ, angstrom)");
  build->add_option("--params", c.params_path, "Drude parameters (JSON)");
  build->add_option("--synthetic", c.synthetic_n, "random synthetic model of this size");
  build->add_flag("--marginal", c.marginal, "synthetic model with Γ = 0");
  build->add_option("--disk", c.disk_count, "hexagonal disk with this many atoms");
  build->add_option("--spacing", c.disk_spacing, "disk spacing (angstrom)");
  build->add_option("--displace", c.displace, "random displacement bound (angstrom)");
  build->add_option("--axis", axis, "x | y | z");
  build->add_option("--seed", c.seed);
  build->add_option("--out", c.out_path, "output model")->required();

  auto* spectrum = app.add_subcommand("spectrum", "polarizability spectrum");
  model_io(spectrum, c);
  window(spectrum, c);
  spectrum->add_option("--method", c.method, "modes | direct");
  spectrum->add_option("--svg", c.svg_path, "optional plot");

  auto* modes = app.add_subcommand("modes", "eigenvalues of the extended kernel");
  model_io(modes, c);
  modes->add_option("--vectors", c.vectors_path, "companion eigenvector dump");

  auto* filter = app.add_subcommand("filter", "mode selection report");
  model_io(filter, c);
  window(filter, c, false);
  filter->add_option("--mode", c.filter_mode, "if | ef");
  filter->add_option("--threshold", c.threshold, "IF threshold on |Re I_k|");
  filter->add_option("--window-min", c.window_min, "EF lower bound (eV)");
  filter->add_option("--window-max", c.window_max, "EF upper bound (eV)");
  filter->add_option("--spectrum-out", c.reduced_path, "reduced spectrum CSV");
  filter->add_option("--svg", c.svg_path, "optional plot");

  auto* propagate = app.add_subcommand("propagate", "phase-space mean under a kick");
  model_io(propagate, c);
  propagate->add_option("--t-max", c.t_max, "atomic time units");
  propagate->add_option("--dt", c.dt, "atomic time units");
  propagate->add_option("--beta", beta, "initial thermal state, 1/eV");
  propagate->add_option("--hbar", c.hbar);
  propagate->add_option("--cov-prefix", c.cov_prefix, "per-sample covariance files");

  auto* field = app.add_subcommand("field", "first-order scattered field");
  model_io(field, c);
  window(field, c);
  field->add_option("--k", k_query, "query wavevector kx,ky,kz (1/bohr), repeatable");
  field->add_option("--incident-k", incident_k, "incident wavevector kx,ky,kz");
  field->add_option("--polarization", polarization, "incident amplitude ex,ey,ez");

  auto* bath = app.add_subcommand("bath", "thermal bath correlations");
  model_io(bath, c);
  window(bath, c);
  bath->add_option("--beta", beta, "1/eV")->required();
  bath->add_option("--hbar", c.hbar);
  bath->add_option("--eta", c.eta, "eV");

  try {
    app.parse(argc, argv);
    const std::pair<CLI::App*, Subcommand> table[] = {
        {build, Subcommand::build},         {spectrum, Subcommand::spectrum}, {modes, Subcommand::modes},
        {filter, Subcommand::filter},       {propagate, Subcommand::propagate}, {field, Subcommand::field},
        {bath, Subcommand::bath}};
    for (const auto& [sub, kind] : table)
      if (sub->parsed()) c.subcommand = kind;
    if (axis == "x") c.axis = 0;
    else if (axis == "y") c.axis = 1;
    else if (axis == "z") c.axis = 2;
    else throw CLI::ValidationError("--axis must be x, y or z");
    if ((propagate->parsed() && propagate->count("--beta")) || bath->parsed()) c.beta = beta;
    for (const auto& k : k_query) c.k_query.push_back(parse_triple(k));
    if (!incident_k.empty()) c.incident_k = parse_triple(incident_k);
    if (!polarization.empty()) c.polarization = parse_triple(polarization);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  }
  return qpm::cli::run(c);
}
