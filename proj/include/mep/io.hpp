#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mep/discretization.hpp"
#include "mep/hyperbolic.hpp"
#include "mep/mesh.hpp"
#include "mep/splitting.hpp"

namespace mep {

namespace detail {

/// All writers go through a temp-file + rename so interrupted runs never
/// leave truncated output behind.
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path) : path_(path), tmp_(path + ".tmp") {
    out_.open(tmp_, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open output file: " + tmp_);
    out_.precision(17);
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
};

}  // namespace detail

/// Legacy-ASCII VTK dump of the mesh alone (quad cells, type 9).
inline void write_vtk_mesh(const Mesh& mesh, const std::string& path) {
  if (mesh.n_cells() == 0) throw std::invalid_argument("write_vtk_mesh: empty mesh");
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << "# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2 v : mesh.vertices) out << v.x << " " << v.y << " 0\n";
  out << "CELLS " << mesh.n_cells() << " " << 5 * mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells) out << "4 " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int k = 0; k < mesh.n_cells(); ++k) out << "9\n";
  file.commit();
}

/// Field snapshot: the dG collocation grid written as disconnected quads so
/// that per-cell nodal values (including the potential sampled at the nodes
/// and a schlieren field exp(−c|∇ρ|/max|∇ρ|)) become plain point data.
inline void write_vtk_snapshot(const Mesh& mesh, const DgLayout& dg,
                               const HypState& state, const CgField& phi,
                               const std::string& path, double schlieren_coef = 10.0) {
  if (mesh.n_cells() == 0) throw std::invalid_argument("write_vtk_snapshot: empty mesh");
  detail::AtomicFile file(path);
  auto& out = file.stream();
  const int n = dg.n_nodes;

  out << "# vtk DataFile Version 3.0\nfields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (int i = 0; i < n; ++i) out << dg.coords[i].x << " " << dg.coords[i].y << " 0\n";
  out << "CELLS " << dg.n_cells << " " << 5 * dg.n_cells << "\n";
  for (int k = 0; k < dg.n_cells; ++k)
    out << "4 " << 4 * k << " " << 4 * k + 1 << " " << 4 * k + 2 << " " << 4 * k + 3 << "\n";
  out << "CELL_TYPES " << dg.n_cells << "\n";
  for (int k = 0; k < dg.n_cells; ++k) out << "9\n";

  // cell-local |∇ρ| at the nodes for the schlieren plot
  std::vector<double> gradmag(n, 0.0);
  double gmax = 0.0;
  for (int k = 0; k < dg.n_cells; ++k)
    for (int c = 0; c < 4; ++c) {
      const int i = dg.node(k, c);
      Vec2 g{0, 0};
      for (int a = 0; a < 4; ++a) g += state.rho[dg.node(k, a)] * dg.grad[i][a];
      gradmag[i] = norm(g);
      gmax = std::max(gmax, gradmag[i]);
    }
  if (gmax == 0.0) gmax = 1.0;

  out << "POINT_DATA " << n << "\n";
  out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) out << state.rho[i] << "\n";
  out << "VECTORS momentum double\n";
  for (int i = 0; i < n; ++i) out << state.mx[i] << " " << state.my[i] << " 0\n";
  if (state.has_energy) {
    out << "SCALARS energy double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) out << state.en[i] << "\n";
  }
  out << "SCALARS potential double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) out << phi[dg.vertex[i]] << "\n";
  out << "SCALARS schlieren double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) out << std::exp(-schlieren_coef * gradmag[i] / gmax) << "\n";
  file.commit();
}

/// CSV step-record series (RFC-4180 profile; 17 significant digits so values
/// round-trip bit-exactly).
inline void write_csv_series(const std::vector<StepRecord>& records, const std::string& path) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << "t,tau,energy_total,energy_hyperbolic,energy_kinetic,energy_field,"
         "gauss_residual,solver_iterations,min_rho,min_e,mass,mass_flux,mass_defect,"
         "mode_amplitude\n";
  char buf[512];
  for (const StepRecord& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g\n",
                  r.t, r.tau, r.energy_total, r.energy_hyperbolic, r.energy_kinetic,
                  r.energy_field, r.gauss_residual, r.solver_iterations, r.min_rho, r.min_e,
                  r.mass, r.mass_flux, r.mass_defect, r.mode_amplitude);
    out << buf;
  }
  file.commit();
}

}  // namespace mep
