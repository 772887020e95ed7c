#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mep/discretization.hpp"

namespace mep {

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Assembled stiffness matrix restricted to the free (non-Dirichlet) nodes,
/// using the same 2×2 quadrature as the matrix-free action.
inline Eigen::SparseMatrix<double> assemble_free_stiffness(const CgLayout& cg) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(16 * cg.n_cells);
  for (int k = 0; k < cg.n_cells; ++k) {
    double local[4][4] = {};
    for (int q = 0; q < Quadrature::n; ++q) {
      const auto& gq = cg.qgrad[k][q];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) local[a][b] += cg.wdet[k][q] * dot(gq[a], gq[b]);
    }
    for (int a = 0; a < 4; ++a) {
      const int fa = cg.free_index[cg.cells[k][a]];
      if (fa < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int fb = cg.free_index[cg.cells[k][b]];
        if (fb >= 0) trip.emplace_back(fa, fb, local[a][b]);
      }
    }
  }
  Eigen::SparseMatrix<double> s(cg.n_free, cg.n_free);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

/// Diagonal of the stiffness operator over all vertices.
inline CgField stiffness_diagonal(const CgLayout& cg) {
  CgField d(cg.n_nodes, 0.0);
  for (int k = 0; k < cg.n_cells; ++k)
    for (int q = 0; q < Quadrature::n; ++q) {
      const auto& gq = cg.qgrad[k][q];
      for (int a = 0; a < 4; ++a) d[cg.cells[k][a]] += cg.wdet[k][q] * dot(gq[a], gq[a]);
    }
  return d;
}

/// Preconditioner for the condensed potential solve. The default factors the
/// (time-independent) stiffness part once per mesh; the preconditioned
/// operator then has spectrum within O(τ²ω_p²) of unity, so the Krylov
/// iteration converges in a handful of steps. A point-Jacobi variant is kept
/// for comparison.
class Preconditioner {
 public:
  enum class Kind { identity, jacobi, stiffness_cholesky };

  static Preconditioner identity() { return Preconditioner(Kind::identity); }

  static Preconditioner jacobi(CgField operator_diagonal, const CgLayout& cg) {
    Preconditioner p(Kind::jacobi);
    p.inv_diag_.assign(cg.n_nodes, 0.0);
    for (int v = 0; v < cg.n_nodes; ++v)
      if (!cg.dirichlet[v] && operator_diagonal[v] != 0.0)
        p.inv_diag_[v] = 1.0 / operator_diagonal[v];
    return p;
  }

  static Preconditioner stiffness_cholesky(const CgLayout& cg) {
    Preconditioner p(Kind::stiffness_cholesky);
    p.free_index_ = cg.free_index;  // own the dof map: safe across copies/moves
    p.n_free_ = cg.n_free;
    p.chol_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    p.chol_->compute(assemble_free_stiffness(cg));
    if (p.chol_->info() != Eigen::Success)
      throw std::runtime_error("stiffness factorization failed");
    return p;
  }

  /// z ≈ M⁻¹ r, with Dirichlet entries pinned to zero.
  void apply(const CgField& r, CgField& z) const {
    switch (kind_) {
      case Kind::identity:
        z = r;
        return;
      case Kind::jacobi: {
        z.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
        return;
      }
      case Kind::stiffness_cholesky: {
        const int n = static_cast<int>(free_index_.size());
        Eigen::VectorXd rf(n_free_);
        for (int v = 0; v < n; ++v)
          if (free_index_[v] >= 0) rf[free_index_[v]] = r[v];
        const Eigen::VectorXd zf = chol_->solve(rf);
        z.assign(n, 0.0);
        for (int v = 0; v < n; ++v)
          if (free_index_[v] >= 0) z[v] = zf[free_index_[v]];
        return;
      }
    }
  }

  Kind kind() const { return kind_; }

 private:
  explicit Preconditioner(Kind k) : kind_(k) {}
  Kind kind_;
  std::vector<double> inv_diag_;
  std::vector<int> free_index_;
  int n_free_ = 0;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> chol_;
};

namespace detail {
inline double vdot(const CgField& a, const CgField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double vnorm(const CgField& a) { return std::sqrt(vdot(a, a)); }
}  // namespace detail

/// Flexible right-preconditioned GMRES (Arnoldi with modified Gram-Schmidt
/// and Givens rotations). op and precond map full-length CG vectors with
/// Dirichlet entries held at zero. Convergence is ‖b − Ax‖ ≤ tol·‖b‖.
template <class Op>
SolveStats fgmres(const Op& op, const Preconditioner& precond, const CgField& b, CgField& x,
                  double tol, int max_iter = 500, int restart = 100) {
  const int n = static_cast<int>(b.size());
  const double bnorm = detail::vnorm(b);
  SolveStats stats;
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    stats.converged = true;
    return stats;
  }
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);

  CgField r(n), w(n);
  std::vector<CgField> v;  // Arnoldi basis
  std::vector<CgField> z;  // preconditioned directions
  std::vector<double> hs((restart + 1) * (restart + 1), 0.0);
  auto H = [&](int i, int j) -> double& { return hs[i * (restart + 1) + j]; };

  while (stats.iterations < max_iter) {
    op.apply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = detail::vnorm(r);
    stats.rel_residual = beta / bnorm;
    if (stats.rel_residual <= tol) {
      stats.converged = true;
      return stats;
    }

    v.assign(1, r);
    for (double& e : v[0]) e /= beta;
    z.clear();
    std::vector<double> g(restart + 1, 0.0), cs(restart, 0.0), sn(restart, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < restart && stats.iterations < max_iter; ++k) {
      z.emplace_back();
      precond.apply(v[k], z[k]);
      op.apply(z[k], w);
      ++stats.iterations;
      for (int i = 0; i <= k; ++i) {
        H(i, k) = detail::vdot(w, v[i]);
        for (int j = 0; j < n; ++j) w[j] -= H(i, k) * v[i][j];
      }
      H(k + 1, k) = detail::vnorm(w);
      if (H(k + 1, k) > 0.0) {
        v.emplace_back(w);
        for (double& e : v[k + 1]) e /= H(k + 1, k);
      }
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      stats.rel_residual = std::abs(g[k + 1]) / bnorm;
      if (stats.rel_residual <= tol || H(k + 1, k) == 0.0) {
        ++k;
        break;
      }
    }
    // back substitution and update
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) x[j] += y[i] * z[i][j];

    op.apply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    stats.rel_residual = detail::vnorm(r) / bnorm;
    if (stats.rel_residual <= tol) {
      stats.converged = true;
      return stats;
    }
  }
  return stats;
}

}  // namespace mep
