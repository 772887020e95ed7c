#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mep/geometry.hpp"
#include "mep/mesh.hpp"
#include "mep/parallel.hpp"

namespace mep {

// 2×2 tensor Gauss rule on the reference cell (exact for the bilinear
// geometry factors and Q1·Q1 integrands used throughout).
struct Quadrature {
  static constexpr int n = 4;
  static constexpr double ga = 0.5 - 0.5 / 1.7320508075688772;
  static constexpr double gb = 0.5 + 0.5 / 1.7320508075688772;
  static constexpr std::array<Vec2, 4> points = {Vec2{ga, ga}, Vec2{gb, ga}, Vec2{ga, gb}, Vec2{gb, gb}};
  static constexpr double weight = 0.25;
};

/// Collocation layout of the discontinuous space V_h: one node per
/// (cell, corner) pair, id = 4·cell + corner.
struct DgLayout {
  int n_cells = 0;
  int n_nodes = 0;
  int n_vertices = 0;
  std::vector<Vec2> coords;               // collocation points x_{j,K}
  std::vector<int> vertex;                // mesh vertex of each node
  std::vector<double> mass;               // lumped masses m_{j,K}
  std::vector<std::array<Vec2, 4>> grad;  // per node: gradient coefficients of
                                          // the four cell-local nodal bases

  int node(int cell, int corner) const { return 4 * cell + corner; }
  int cell_of(int node) const { return node / 4; }
};

/// Layout of the continuous space H_h: one node per mesh vertex, Dirichlet
/// flags, and the cached cell quadrature geometry from which the matrix-free
/// stiffness action re-derives its local stencils.
struct CgLayout {
  int n_nodes = 0;
  int n_cells = 0;
  std::vector<Vec2> coords;
  std::vector<std::array<int, 4>> cells;
  std::vector<uint8_t> dirichlet;
  int n_free = 0;
  std::vector<int> free_index;  // vertex -> compact free numbering, -1 at Dirichlet

  // per cell, per quadrature point: weighted |det J| and physical gradients
  std::vector<std::array<double, 4>> wdet;
  std::vector<std::array<std::array<Vec2, 4>, 4>> qgrad;  // [cell][qp][basis]
};

inline DgLayout build_dg_layout(const Mesh& mesh) {
  DgLayout dg;
  dg.n_cells = mesh.n_cells();
  dg.n_nodes = 4 * dg.n_cells;
  dg.n_vertices = mesh.n_vertices();
  dg.coords.resize(dg.n_nodes);
  dg.vertex.resize(dg.n_nodes);
  dg.mass.assign(dg.n_nodes, 0.0);
  dg.grad.resize(dg.n_nodes);

  for (int k = 0; k < dg.n_cells; ++k) {
    const CellMapping m = mesh.mapping(k);
    for (int c = 0; c < 4; ++c) {
      const int i = dg.node(k, c);
      dg.coords[i] = m.v[c];
      dg.vertex[i] = mesh.cells[k][c];
      const Vec2 rc = CellMapping::ref_corner[c];
      const Mat2 jt = m.jacobian(rc.x, rc.y).inverse_transpose();
      const auto sg = CellMapping::shape_grad(rc.x, rc.y);
      for (int a = 0; a < 4; ++a) dg.grad[i][a] = jt.apply(sg[a]);
    }
    for (const Vec2 q : Quadrature::points) {
      const double wd = Quadrature::weight * m.jacobian(q.x, q.y).det();
      const auto sh = CellMapping::shape(q.x, q.y);
      for (int c = 0; c < 4; ++c) dg.mass[dg.node(k, c)] += wd * sh[c];
    }
  }
  for (int i = 0; i < dg.n_nodes; ++i)
    if (!(dg.mass[i] > 0.0))
      throw std::runtime_error("build_dg_layout: non-positive lumped mass (mesh quality)");
  return dg;
}

inline CgLayout build_cg_layout(const Mesh& mesh, bool dirichlet_on_boundary = true) {
  CgLayout cg;
  cg.n_nodes = mesh.n_vertices();
  cg.n_cells = mesh.n_cells();
  cg.coords = mesh.vertices;
  cg.cells = mesh.cells;
  cg.dirichlet.assign(cg.n_nodes, 0);
  if (dirichlet_on_boundary)
    for (int v = 0; v < cg.n_nodes; ++v) cg.dirichlet[v] = mesh.boundary_vertex[v];
  cg.free_index.assign(cg.n_nodes, -1);
  for (int v = 0; v < cg.n_nodes; ++v)
    if (!cg.dirichlet[v]) cg.free_index[v] = cg.n_free++;

  cg.wdet.resize(cg.n_cells);
  cg.qgrad.resize(cg.n_cells);
  for (int k = 0; k < cg.n_cells; ++k) {
    const CellMapping m = mesh.mapping(k);
    for (int q = 0; q < Quadrature::n; ++q) {
      const Vec2 p = Quadrature::points[q];
      const Mat2 j = m.jacobian(p.x, p.y);
      cg.wdet[k][q] = Quadrature::weight * j.det();
      const Mat2 jt = j.inverse_transpose();
      const auto sg = CellMapping::shape_grad(p.x, p.y);
      for (int a = 0; a < 4; ++a) cg.qgrad[k][q][a] = jt.apply(sg[a]);
    }
  }
  return cg;
}

/// Sparse c_ij stencil of the collocation dG skeleton with boundary vectors
/// c_i^∂D. Skew-symmetry and row consistency are checked at assembly
/// tolerance and then enforced exactly in floating point, so constant states
/// telescope to pure boundary terms.
struct CouplingGraph {
  int n_nodes = 0;
  std::vector<int> row_offset;
  std::vector<int> col;
  std::vector<Vec2> c;
  std::vector<double> cnorm;
  std::vector<Vec2> nvec;      // c / |c| (zero where |c| = 0)
  std::vector<int> transpose;  // position of the (j,i) entry
  std::vector<int> diag;       // position of the (i,i) entry per row

  std::vector<Vec2> bd_c;  // c_i^∂D, zero away from the boundary
  std::vector<double> bd_cnorm;
  std::vector<Vec2> bd_n;
  std::vector<int> boundary_nodes;

  int begin(int i) const { return row_offset[i]; }
  int end(int i) const { return row_offset[i + 1]; }
};

inline CouplingGraph assemble_coupling_graph(const Mesh& mesh, const DgLayout& dg) {
  const int n = dg.n_nodes;
  std::vector<std::map<int, Vec2>> adj(n);
  std::vector<Vec2> bd(n, Vec2{});

  // Volume term −∫_K ∇φ_i φ_j dx.
  for (int k = 0; k < dg.n_cells; ++k) {
    const CellMapping m = mesh.mapping(k);
    for (const Vec2 q : Quadrature::points) {
      const Mat2 j = m.jacobian(q.x, q.y);
      const double wd = Quadrature::weight * j.det();
      const Mat2 jt = j.inverse_transpose();
      const auto sh = CellMapping::shape(q.x, q.y);
      const auto sg = CellMapping::shape_grad(q.x, q.y);
      for (int a = 0; a < 4; ++a) {
        const Vec2 ga = jt.apply(sg[a]);
        for (int b = 0; b < 4; ++b)
          adj[dg.node(k, a)][dg.node(k, b)] -= (wd * sh[b]) * ga;
      }
    }
  }

  // Face terms: central halves ½∫_F φ_i φ_j n on every face. Boundary faces
  // feed c_i^∂D = ½∫_F φ_i n, which closes the row-consistency telescope.
  constexpr double gs0 = 0.5 - 0.5 / 1.7320508075688772;
  constexpr double gs1 = 0.5 + 0.5 / 1.7320508075688772;
  for (const Face& f : mesh.faces) {
    const Vec2 p0 = mesh.vertices[f.v0];
    const Vec2 p1 = mesh.vertices[f.v1];
    const Vec2 t = p1 - p0;
    const double len = norm(t);
    const Vec2 nrm = Vec2{t.y, -t.x} / len;  // outward from cell[0] (CCW cells)

    const int k0 = f.cell[0];
    const int e0 = f.edge[0];
    const std::array<int, 2> loc0 = {e0, (e0 + 1) % 4};  // traces (1-s), s

    for (double s : {gs0, gs1}) {
      const double w = 0.5 * len;
      const std::array<double, 2> tr = {1.0 - s, s};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          adj[dg.node(k0, loc0[a])][dg.node(k0, loc0[b])] += (0.5 * w * tr[a] * tr[b]) * nrm;
      if (!f.boundary()) {
        const int k1 = f.cell[1];
        const int e1 = f.edge[1];
        // cell[1] stores the edge reversed: its corner e1 is f.v1 (trace s).
        const std::array<int, 2> loc1 = {(e1 + 1) % 4, e1};  // traces (1-s), s
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double v = 0.5 * w * tr[a] * tr[b];
            adj[dg.node(k1, loc1[a])][dg.node(k1, loc1[b])] -= v * nrm;
            adj[dg.node(k0, loc0[a])][dg.node(k1, loc1[b])] += v * nrm;
            adj[dg.node(k1, loc1[a])][dg.node(k0, loc0[b])] -= v * nrm;
          }
      } else {
        for (int a = 0; a < 2; ++a) bd[dg.node(k0, loc0[a])] += (0.5 * w * tr[a]) * nrm;
      }
    }
  }

  CouplingGraph g;
  g.n_nodes = n;
  g.row_offset.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    g.row_offset[i + 1] = g.row_offset[i] + static_cast<int>(adj[i].size());
  const int nnz = g.row_offset[n];
  g.col.resize(nnz);
  g.c.resize(nnz);
  {
    int pos = 0;
    for (int i = 0; i < n; ++i)
      for (const auto& [j, v] : adj[i]) {
        g.col[pos] = j;
        g.c[pos] = v;
        ++pos;
      }
  }

  auto find_pos = [&](int i, int j) {
    for (int p = g.begin(i); p < g.end(i); ++p)
      if (g.col[p] == j) return p;
    return -1;
  };
  g.transpose.assign(nnz, -1);
  for (int i = 0; i < n; ++i)
    for (int p = g.begin(i); p < g.end(i); ++p) {
      const int q = find_pos(g.col[p], i);
      if (q < 0) throw std::runtime_error("coupling graph: unpaired stencil entry");
      g.transpose[p] = q;
    }

  double scale = 0.0;
  for (const Vec2 v : g.c) scale = std::max(scale, std::abs(v.x) + std::abs(v.y));

  // Skew-symmetry: check, then enforce exactly.
  for (int i = 0; i < n; ++i)
    for (int p = g.begin(i); p < g.end(i); ++p) {
      const int j = g.col[p];
      if (j <= i) continue;
      const int q = g.transpose[p];
      const Vec2 sum = g.c[p] + g.c[q];
      if (std::abs(sum.x) + std::abs(sum.y) > 1e-12 * scale)
        throw std::runtime_error("coupling graph: skew-symmetry violated");
      const Vec2 avg = 0.5 * (g.c[p] - g.c[q]);
      g.c[p] = avg;
      g.c[q] = -avg;
    }

  // Row consistency: check, then route the residual through the diagonal so
  // Σ_j c_ij + c_i^∂D vanishes exactly.
  g.diag.assign(n, -1);
  g.bd_c = bd;
  for (int i = 0; i < n; ++i) {
    const int dpos = find_pos(i, i);
    if (dpos < 0) throw std::runtime_error("coupling graph: missing diagonal entry");
    g.diag[i] = dpos;
    Vec2 off{};
    for (int p = g.begin(i); p < g.end(i); ++p)
      if (p != dpos) off += g.c[p];
    const Vec2 target = -(off + g.bd_c[i]);
    const Vec2 err = g.c[dpos] - target;
    if (std::abs(err.x) + std::abs(err.y) > 1e-12 * scale)
      throw std::runtime_error("coupling graph: consistency violated");
    g.c[dpos] = target;
  }

  g.cnorm.resize(nnz);
  g.nvec.resize(nnz);
  for (int p = 0; p < nnz; ++p) {
    g.cnorm[p] = norm(g.c[p]);
    g.nvec[p] = g.cnorm[p] > 0.0 ? g.c[p] / g.cnorm[p] : Vec2{};
  }
  g.bd_cnorm.assign(n, 0.0);
  g.bd_n.assign(n, Vec2{});
  for (int i = 0; i < n; ++i) {
    g.bd_cnorm[i] = norm(g.bd_c[i]);
    if (g.bd_cnorm[i] > 0.0) {
      g.bd_n[i] = g.bd_c[i] / g.bd_cnorm[i];
      g.boundary_nodes.push_back(i);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fields and lumped products

using DgField = std::vector<double>;  // one coefficient per dG node
using CgField = std::vector<double>;  // one coefficient per vertex

struct DgVecField {
  std::vector<double> x, y;
  explicit DgVecField(int n = 0) : x(n, 0.0), y(n, 0.0) {}
  int size() const { return static_cast<int>(x.size()); }
};

inline double lumped_inner_product(const DgLayout& dg, const DgField& f, const DgField& g) {
  if (static_cast<int>(f.size()) != dg.n_nodes || static_cast<int>(g.size()) != dg.n_nodes)
    throw std::invalid_argument("lumped_inner_product: layout mismatch");
  double s = 0.0;
  for (int i = 0; i < dg.n_nodes; ++i) s += dg.mass[i] * f[i] * g[i];
  return s;
}

inline double lumped_inner_product(const DgLayout& dg, const DgVecField& f, const DgVecField& g) {
  if (f.size() != dg.n_nodes || g.size() != dg.n_nodes)
    throw std::invalid_argument("lumped_inner_product: layout mismatch");
  double s = 0.0;
  for (int i = 0; i < dg.n_nodes; ++i)
    s += dg.mass[i] * (f.x[i] * g.x[i] + f.y[i] * g.y[i]);
  return s;
}

inline double lumped_norm(const DgLayout& dg, const DgVecField& f) {
  return std::sqrt(lumped_inner_product(dg, f, f));
}

/// Nodal interpolant: evaluates f at every collocation point.
template <class F>
DgField nodal_interpolate(const DgLayout& dg, F&& f) {
  DgField out(dg.n_nodes);
  for (int i = 0; i < dg.n_nodes; ++i) out[i] = f(dg.coords[i]);
  return out;
}

/// Consistent L²(D) norm of a dG field (2×2 Gauss).
inline double dg_l2_norm(const Mesh& mesh, const DgLayout& dg, const DgField& f) {
  double s = 0.0;
  for (int k = 0; k < dg.n_cells; ++k) {
    const CellMapping m = mesh.mapping(k);
    for (const Vec2 q : Quadrature::points) {
      const auto sh = CellMapping::shape(q.x, q.y);
      double val = 0.0;
      for (int c = 0; c < 4; ++c) val += sh[c] * f[dg.node(k, c)];
      s += Quadrature::weight * m.jacobian(q.x, q.y).det() * val * val;
    }
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// CG-space operators (matrix-free: local stencils are re-derived from the
// cached quadrature geometry on every application)

/// y ← action of the stiffness form (∇φ, ∇ψ) on all rows. Dirichlet rows are
/// not zeroed here; callers constrain as needed.
inline void cg_stiffness_apply(const CgLayout& cg, const CgField& x, CgField& y,
                               unsigned nthreads = 1) {
  y.assign(cg.n_nodes, 0.0);
  auto run = [&](CgField& yy, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto& vid = cg.cells[k];
      const double fv[4] = {x[vid[0]], x[vid[1]], x[vid[2]], x[vid[3]]};
      double acc[4] = {0, 0, 0, 0};
      for (int q = 0; q < Quadrature::n; ++q) {
        const auto& gq = cg.qgrad[k][q];
        Vec2 gx{0, 0};
        for (int a = 0; a < 4; ++a) gx += fv[a] * gq[a];
        gx *= cg.wdet[k][q];
        for (int a = 0; a < 4; ++a) acc[a] += dot(gq[a], gx);
      }
      for (int a = 0; a < 4; ++a) yy[vid[a]] += acc[a];
    }
  };
  if (nthreads <= 1) {
    run(y, 0, cg.n_cells);
    return;
  }
  std::vector<CgField> buf(nthreads, CgField(cg.n_nodes, 0.0));
  parallel_for_chunks(cg.n_cells, nthreads,
                      [&](unsigned t, std::size_t b, std::size_t e) { run(buf[t], b, e); });
  for (unsigned t = 0; t < nthreads; ++t)
    for (int i = 0; i < cg.n_nodes; ++i) y[i] += buf[t][i];
}

/// ‖∇φ‖²_{L²} as the quadratic form of the same discrete stiffness operator
/// (keeps the discrete energy identities exact).
inline double cg_stiffness_energy(const CgLayout& cg, const CgField& x) {
  CgField y;
  cg_stiffness_apply(cg, x, y);
  double s = 0.0;
  for (int i = 0; i < cg.n_nodes; ++i) s += x[i] * y[i];
  return s;
}

/// Cell-local gradients of a continuous field at the dG collocation points
/// (discontinuous across cells).
inline void cg_gradient_at_dg_nodes(const DgLayout& dg, const CgLayout& cg, const CgField& phi,
                                    DgVecField& out, unsigned nthreads = 1) {
  out.x.resize(dg.n_nodes);
  out.y.resize(dg.n_nodes);
  parallel_for_chunks(dg.n_cells, nthreads, [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto& vid = cg.cells[k];
      const double fv[4] = {phi[vid[0]], phi[vid[1]], phi[vid[2]], phi[vid[3]]};
      for (int c = 0; c < 4; ++c) {
        const int i = 4 * static_cast<int>(k) + c;
        Vec2 gx{0, 0};
        for (int a = 0; a < 4; ++a) gx += fv[a] * dg.grad[i][a];
        out.x[i] = gx.x;
        out.y[i] = gx.y;
      }
    }
  });
}

/// ψ ↦ ⟨scaling·w, ∇ψ⟩_h over all CG rows (lumped transport functional).
inline void dg_divergence_weak_form(const DgLayout& dg, const CgLayout& cg, const DgVecField& w,
                                    const DgField& scaling, CgField& y, unsigned nthreads = 1) {
  if (w.size() != dg.n_nodes || static_cast<int>(scaling.size()) != dg.n_nodes)
    throw std::invalid_argument("dg_divergence_weak_form: layout mismatch");
  y.assign(cg.n_nodes, 0.0);
  auto run = [&](CgField& yy, std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto& vid = cg.cells[k];
      for (int c = 0; c < 4; ++c) {
        const int i = 4 * static_cast<int>(k) + c;
        const Vec2 mv = (dg.mass[i] * scaling[i]) * Vec2{w.x[i], w.y[i]};
        for (int a = 0; a < 4; ++a) yy[vid[a]] += dot(mv, dg.grad[i][a]);
      }
    }
  };
  if (nthreads <= 1) {
    run(y, 0, dg.n_cells);
    return;
  }
  std::vector<CgField> buf(nthreads, CgField(cg.n_nodes, 0.0));
  parallel_for_chunks(dg.n_cells, nthreads,
                      [&](unsigned t, std::size_t b, std::size_t e) { run(buf[t], b, e); });
  for (unsigned t = 0; t < nthreads; ++t)
    for (int i = 0; i < cg.n_nodes; ++i) y[i] += buf[t][i];
}

/// Collocated charge functional ⟨ρ, ω_i⟩_h = Σ_{K∋i} m_{i,K} ρ_{i,K} per vertex.
inline void dg_collocated_charge(const DgLayout& dg, const CgLayout& cg, const DgField& rho,
                                 CgField& y) {
  y.assign(cg.n_nodes, 0.0);
  for (int i = 0; i < dg.n_nodes; ++i) y[dg.vertex[i]] += dg.mass[i] * rho[i];
}

}  // namespace mep
