#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mep/geometry.hpp"

namespace mep {

/// Bilinear reference-to-physical map T_K : [0,1]² → K for one quadrilateral.
/// Corner order is counterclockwise: (0,0), (1,0), (1,1), (0,1).
struct CellMapping {
  std::array<Vec2, 4> v;

  static constexpr std::array<Vec2, 4> ref_corner = {
      Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};

  static std::array<double, 4> shape(double xi, double eta) {
    return {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  }

  static std::array<Vec2, 4> shape_grad(double xi, double eta) {
    return {Vec2{-(1 - eta), -(1 - xi)}, Vec2{(1 - eta), -xi},
            Vec2{eta, xi}, Vec2{-eta, (1 - xi)}};
  }

  Vec2 map(double xi, double eta) const {
    const auto n = shape(xi, eta);
    return n[0] * v[0] + n[1] * v[1] + n[2] * v[2] + n[3] * v[3];
  }

  Mat2 jacobian(double xi, double eta) const {
    const auto g = shape_grad(xi, eta);
    Vec2 txi = g[0].x * v[0] + g[1].x * v[1] + g[2].x * v[2] + g[3].x * v[3];
    Vec2 teta = g[0].y * v[0] + g[1].y * v[1] + g[2].y * v[2] + g[3].y * v[3];
    return Mat2{txi.x, txi.y, teta.x, teta.y};
  }

  /// Inverts the bilinear map by Newton iteration. Returns reference
  /// coordinates; converged flag is false if the iteration stalls.
  bool invert(Vec2 x, Vec2& ref, double tol = 1e-12, int max_iter = 50) const {
    double xi = 0.5, eta = 0.5;
    for (int it = 0; it < max_iter; ++it) {
      const Vec2 r = map(xi, eta) - x;
      if (std::abs(r.x) + std::abs(r.y) < tol) {
        ref = {xi, eta};
        return true;
      }
      const Mat2 j = jacobian(xi, eta);
      const double idet = 1.0 / j.det();
      xi -= idet * (j.d * r.x - j.c * r.y);
      eta -= idet * (-j.b * r.x + j.a * r.y);
    }
    ref = {xi, eta};
    return false;
  }
};

/// Mesh face: a straight edge shared by two cells, or a boundary edge.
struct Face {
  int v0 = -1, v1 = -1;                 // endpoint vertices
  std::array<int, 2> cell = {-1, -1};   // incident cells; cell[1] < 0 ⇒ boundary
  std::array<int8_t, 2> edge = {-1, -1};  // local edge index within each cell
  bool boundary() const { return cell[1] < 0; }
};

/// Conforming quadrilateral mesh. Cells store vertex indices counterclockwise;
/// local edge e connects corners e and (e+1)%4. Immutable after construction.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<Face> faces;
  std::vector<uint8_t> boundary_vertex;
  int refinement_level = 0;

  // Disk meshes carry the circle radius plus a per-vertex radial blend
  // weight (1 on the rim, decaying inward) used by global refinement.
  double disk_radius = 0.0;  // 0 ⇒ not a disk mesh
  std::vector<double> blend;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  CellMapping mapping(int k) const {
    const auto& c = cells[k];
    return CellMapping{{vertices[c[0]], vertices[c[1]], vertices[c[2]], vertices[c[3]]}};
  }

  /// Exact area of cell k (the Jacobian determinant of a bilinear map is
  /// affine, so 2×2 Gauss integrates it exactly).
  double cell_area(int k) const {
    static constexpr double q0 = 0.5 - 0.5 / 1.7320508075688772;
    static constexpr double q1 = 0.5 + 0.5 / 1.7320508075688772;
    const CellMapping m = mapping(k);
    double a = 0;
    for (double xi : {q0, q1})
      for (double eta : {q0, q1}) a += 0.25 * m.jacobian(xi, eta).det();
    return a;
  }

  double total_area() const {
    double a = 0;
    for (int k = 0; k < n_cells(); ++k) a += cell_area(k);
    return a;
  }
};

namespace detail {

inline void build_faces(Mesh& mesh) {
  mesh.faces.clear();
  std::map<std::pair<int, int>, int> seen;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    for (int e = 0; e < 4; ++e) {
      const int a = mesh.cells[k][e];
      const int b = mesh.cells[k][(e + 1) % 4];
      const auto key = std::minmax(a, b);
      auto it = seen.find(key);
      if (it == seen.end()) {
        Face f;
        f.v0 = a;
        f.v1 = b;
        f.cell[0] = k;
        f.edge[0] = static_cast<int8_t>(e);
        seen.emplace(key, static_cast<int>(mesh.faces.size()));
        mesh.faces.push_back(f);
      } else {
        Face& f = mesh.faces[it->second];
        if (!f.boundary())
          throw std::runtime_error("mesh: face shared by more than two cells");
        f.cell[1] = k;
        f.edge[1] = static_cast<int8_t>(e);
      }
    }
  }
  mesh.boundary_vertex.assign(mesh.n_vertices(), 0);
  for (const Face& f : mesh.faces)
    if (f.boundary()) {
      mesh.boundary_vertex[f.v0] = 1;
      mesh.boundary_vertex[f.v1] = 1;
    }
}

inline void check_jacobians(const Mesh& mesh) {
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const CellMapping m = mesh.mapping(k);
    // det J is affine in (ξ,η): positivity at the corners is sufficient.
    for (const Vec2 c : CellMapping::ref_corner)
      if (m.jacobian(c.x, c.y).det() <= 0.0)
        throw std::runtime_error("mesh: non-positive Jacobian in cell " + std::to_string(k));
  }
}

}  // namespace detail

inline Mesh build_rectangle_mesh(Vec2 lo, Vec2 hi, int nx, int ny) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rectangle_mesh: subdivisions must be >= 1");
  if (!(hi.x > lo.x) || !(hi.y > lo.y))
    throw std::invalid_argument("build_rectangle_mesh: empty bounds");
  Mesh mesh;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({lo.x + (hi.x - lo.x) * i / nx, lo.y + (hi.y - lo.y) * j / ny});
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  detail::build_faces(mesh);
  detail::check_jacobians(mesh);
  return mesh;
}

/// Splits every quad into four. New boundary-edge midpoints of a disk mesh
/// are projected onto the circle; other new vertices are blended radially by
/// the averaged blend weight of their parents (transfinite-style smoothing).
inline Mesh refine_globally(const Mesh& mesh) {
  Mesh out;
  out.vertices = mesh.vertices;
  out.refinement_level = mesh.refinement_level + 1;
  out.disk_radius = mesh.disk_radius;
  const bool disk = mesh.disk_radius > 0.0;
  out.blend = mesh.blend;

  auto blended_point = [&](const std::vector<int>& parents, bool on_boundary) -> std::pair<Vec2, double> {
    Vec2 p{0, 0};
    double w = 0, r = 0;
    for (int v : parents) {
      p += mesh.vertices[v];
      if (disk) {
        w += mesh.blend[v];
        r += norm(mesh.vertices[v]);
      }
    }
    const double inv = 1.0 / parents.size();
    p *= inv;
    if (!disk) return {p, 0.0};
    w *= inv;
    r *= inv;
    if (on_boundary) return {mesh.disk_radius * (p / norm(p)), 1.0};
    const double pr = norm(p);
    if (pr < 1e-14 || w == 0.0) return {p, w};
    return {((1.0 - w) * pr + w * r) * (p / pr), w};
  };

  // Edge midpoints (keyed by sorted endpoints), then cell centroids.
  std::map<std::pair<int, int>, int> edge_vertex;
  std::vector<uint8_t> boundary_edge_key;
  for (const Face& f : mesh.faces) {
    const auto key = std::minmax(f.v0, f.v1);
    auto [p, w] = blended_point({f.v0, f.v1}, f.boundary());
    edge_vertex[key] = out.n_vertices();
    out.vertices.push_back(p);
    if (disk) out.blend.push_back(w);
  }
  std::vector<int> centroid_vertex(mesh.n_cells());
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto& c = mesh.cells[k];
    auto [p, w] = blended_point({c[0], c[1], c[2], c[3]}, false);
    centroid_vertex[k] = out.n_vertices();
    out.vertices.push_back(p);
    if (disk) out.blend.push_back(w);
  }

  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto& c = mesh.cells[k];
    std::array<int, 4> m;
    for (int e = 0; e < 4; ++e)
      m[e] = edge_vertex.at(std::minmax(c[e], c[(e + 1) % 4]));
    const int mid = centroid_vertex[k];
    out.cells.push_back({c[0], m[0], mid, m[3]});
    out.cells.push_back({m[0], c[1], m[1], mid});
    out.cells.push_back({mid, m[1], c[2], m[2]});
    out.cells.push_back({m[3], mid, m[2], c[3]});
  }

  detail::build_faces(out);
  detail::check_jacobians(out);
  return out;
}

/// Coarse 12-cell disk: a 2×2 block of central square cells plus an 8-cell
/// annulus ring, refined `refinement` times with rim projection and radial
/// blending. Every boundary vertex lies on the circle of radius R exactly.
inline Mesh build_disk_mesh(double radius, int refinement) {
  if (!(radius > 0.0)) throw std::invalid_argument("build_disk_mesh: radius must be positive");
  if (refinement < 0) throw std::invalid_argument("build_disk_mesh: refinement must be >= 0");

  Mesh mesh;
  mesh.disk_radius = radius;
  const double a = 0.4 * radius;  // half-width of the central block

  // 3×3 grid of the central block.
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      mesh.vertices.push_back({a * (i - 1), a * (j - 1)});
  auto gid = [](int i, int j) { return j * 3 + i; };
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      mesh.cells.push_back({gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1)});

  // Block perimeter, counterclockwise starting at (a, -a).
  const std::array<int, 8> perim = {gid(2, 0), gid(2, 1), gid(2, 2), gid(1, 2),
                                    gid(0, 2), gid(0, 1), gid(0, 0), gid(1, 0)};
  // One rim vertex radially outward of each perimeter vertex.
  std::array<int, 8> rim;
  for (int p = 0; p < 8; ++p) {
    const Vec2 q = mesh.vertices[perim[p]];
    rim[p] = mesh.n_vertices();
    mesh.vertices.push_back(radius * (q / norm(q)));
  }
  for (int p = 0; p < 8; ++p) {
    const int pn = (p + 1) % 8;
    mesh.cells.push_back({perim[p], rim[p], rim[pn], perim[pn]});
  }

  mesh.blend.assign(mesh.n_vertices(), 0.0);
  for (int p = 0; p < 8; ++p) mesh.blend[rim[p]] = 1.0;

  detail::build_faces(mesh);
  detail::check_jacobians(mesh);
  for (int r = 0; r < refinement; ++r) mesh = refine_globally(mesh);
  return mesh;
}

}  // namespace mep
