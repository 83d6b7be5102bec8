#pragma once
// Independent reference implementations used only by tests.

#include <algorithm>
#include <numeric>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "surfpde/geometry.hpp"
#include "surfpde/stencil.hpp"

namespace oracle {

using surfpde::Index;
using surfpde::ParamPoint;
using surfpde::ScalarField;
using surfpde::SurfaceDescriptor;
using surfpde::Vec3;

using LVec3 = Eigen::Matrix<long double, 3, 1>;

inline LVec3 embed_ld(const SurfaceDescriptor& s, long double a, long double b) {
  const auto x = surfpde::embed_map<long double>(s, a, b);
  return {x[0], x[1], x[2]};
}

inline long double field_ld(const SurfaceDescriptor& s, const ScalarField& u, long double a, long double b,
                            double t) {
  return u.ld(a, b, surfpde::embed_map<long double>(s, a, b), t);
}

/// Laplace-Beltrami from central differences in long double: every
/// derivative of both the embedding and the field is differenced.
inline double fd_laplacian(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t = 0.0,
                           long double h = 1e-5L) {
  const long double a = p.psi1, b = p.psi2;
  auto X = [&](long double da, long double db) { return embed_ld(s, a + da, b + db); };
  auto U = [&](long double da, long double db) { return field_ld(s, u, a + da, b + db, t); };

  LVec3 xd[2] = {(X(h, 0) - X(-h, 0)) / (2 * h), (X(0, h) - X(0, -h)) / (2 * h)};
  LVec3 xdd[2][2];
  xdd[0][0] = (X(h, 0) - 2 * X(0, 0) + X(-h, 0)) / (h * h);
  xdd[1][1] = (X(0, h) - 2 * X(0, 0) + X(0, -h)) / (h * h);
  xdd[0][1] = xdd[1][0] = (X(h, h) - X(h, -h) - X(-h, h) + X(-h, -h)) / (4 * h * h);
  long double ud[2] = {(U(h, 0) - U(-h, 0)) / (2 * h), (U(0, h) - U(0, -h)) / (2 * h)};
  long double udd[2][2];
  udd[0][0] = (U(h, 0) - 2 * U(0, 0) + U(-h, 0)) / (h * h);
  udd[1][1] = (U(0, h) - 2 * U(0, 0) + U(0, -h)) / (h * h);
  udd[0][1] = udd[1][0] = (U(h, h) - U(h, -h) - U(-h, h) + U(-h, -h)) / (4 * h * h);

  long double g[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g[i][j] = xd[i].dot(xd[j]);
  const long double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const long double gi[2][2] = {{g[1][1] / det, -g[0][1] / det}, {-g[1][0] / det, g[0][0] / det}};
  long double lap = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      long double ct = 0;
      for (int k = 0; k < 2; ++k) {
        long double gk = 0;
        for (int l = 0; l < 2; ++l) gk += gi[k][l] * xd[l].dot(xdd[i][j]);
        ct += gk * ud[k];
      }
      lap += gi[i][j] * (udd[i][j] - ct);
    }
  return static_cast<double>(lap);
}

/// Metric tensor from central differences.
inline Eigen::Matrix2d fd_metric(const SurfaceDescriptor& s, ParamPoint p, long double h = 1e-6L) {
  const long double a = p.psi1, b = p.psi2;
  LVec3 xd[2] = {(embed_ld(s, a + h, b) - embed_ld(s, a - h, b)) / (2 * h),
                 (embed_ld(s, a, b + h) - embed_ld(s, a, b - h)) / (2 * h)};
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = static_cast<double>(xd[i].dot(xd[j]));
  return g;
}

/// Brute-force k nearest by (distance, id) over the candidate ids.
inline std::vector<Index> scan_knn(const std::vector<Vec3>& pts, const std::vector<Index>& ids, const Vec3& q,
                                   Index k) {
  std::vector<std::pair<double, Index>> all;
  for (Index id : ids) all.push_back({surfpde::distance2(q, pts[static_cast<std::size_t>(id)]), id});
  std::sort(all.begin(), all.end());
  std::vector<Index> out;
  for (Index i = 0; i < std::min<Index>(k, static_cast<Index>(all.size())); ++i) out.push_back(all[i].second);
  return out;
}

/// Brute-force anisotropic neighbors: base first, then candidates ordered
/// by (weighted distance, id).
inline std::vector<Index> scan_restricted(const std::vector<Vec3>& pts, const std::vector<Index>& ids, Index base,
                                          const Vec3& n, Index k, double omega) {
  const Vec3& xb = pts[static_cast<std::size_t>(base)];
  std::vector<std::pair<double, Index>> all;
  for (Index id : ids)
    if (id != base) all.push_back({surfpde::weighted_distance(pts[static_cast<std::size_t>(id)] - xb, n, omega), id});
  std::sort(all.begin(), all.end());
  std::vector<Index> out{base};
  for (std::size_t i = 0; out.size() < static_cast<std::size_t>(k) && i < all.size(); ++i) out.push_back(all[i].second);
  return out;
}

}  // namespace oracle

#include "surfpde/qp.hpp"

namespace oracle {

struct EnumResult {
  bool feasible = false;
  Eigen::VectorXd z;
  double objective = 0.0;
};

/// Solves every equality-constrained subproblem obtained by forcing a
/// subset of inequalities active and keeps the cheapest feasible point.
/// Exponential in the inequality count; for tiny programs only.
inline EnumResult enumerate_qp(const surfpde::QuadraticProgram& qp, double feas_tol = 1e-9) {
  const Index n = qp.n(), m = qp.E.rows(), q = qp.G.rows();
  EnumResult best;
  const Eigen::VectorXd c = qp.c.size() ? qp.c : Eigen::VectorXd::Zero(n);
  for (unsigned mask = 0; mask < (1u << q); ++mask) {
    std::vector<Index> act;
    for (Index j = 0; j < q; ++j)
      if (mask & (1u << j)) act.push_back(j);
    const Index a = m + static_cast<Index>(act.size());
    if (a > n) continue;
    Eigen::MatrixXd A(a, n);
    Eigen::VectorXd b(a);
    if (m) {
      A.topRows(m) = qp.E;
      b.head(m) = qp.e;
    }
    for (std::size_t k = 0; k < act.size(); ++k) {
      A.row(m + static_cast<Index>(k)) = qp.G.row(act[k]);
      b[m + static_cast<Index>(k)] = qp.g[act[k]];
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + a, n + a);
    kkt.topLeftCorner(n, n) = qp.H.asDiagonal();
    kkt.topRightCorner(n, a) = A.transpose();
    kkt.bottomLeftCorner(a, n) = A;
    Eigen::VectorXd rhs(n + a);
    rhs << -c, b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < n + a) continue;
    const Eigen::VectorXd z = lu.solve(rhs).head(n);
    const double scale = 1.0 + z.norm();
    if (m && (qp.E * z - qp.e).cwiseAbs().maxCoeff() > feas_tol * scale) continue;
    if (q && (qp.G * z - qp.g).maxCoeff() > feas_tol * scale) continue;
    const double f = qp.objective(z);
    if (!best.feasible || f < best.objective) {
      best.feasible = true;
      best.z = z;
      best.objective = f;
    }
  }
  return best;
}

inline double rnd(std::uint64_t stream, std::uint64_t& ctr) { return 2.0 * surfpde::uniform01(2024, stream, ctr++) - 1.0; }

// Random strictly convex program; feasible ones are built around a random
// point with a mix of tight and slack inequalities.
inline surfpde::QuadraticProgram random_program(std::uint64_t id, bool force_feasible) {
  std::uint64_t ctr = 0;
  auto r = [&] { return rnd(id, ctr); };
  const Index n = 2 + static_cast<Index>(7 * surfpde::uniform01(7, id, 0)) % 7;
  const Index m = static_cast<Index>(surfpde::uniform01(7, id, 1) * static_cast<double>(std::min<Index>(3, n - 1) + 1));
  const Index q = static_cast<Index>(surfpde::uniform01(7, id, 2) * 7.0);
  surfpde::QuadraticProgram qp;
  qp.H.resize(n);
  for (Index i = 0; i < n; ++i) qp.H[i] = 0.1 + 5.0 * (r() + 1.0);
  qp.c.resize(n);
  for (Index i = 0; i < n; ++i) qp.c[i] = 3.0 * r();
  Eigen::VectorXd z0(n);
  for (Index i = 0; i < n; ++i) z0[i] = r();
  qp.E.resize(m, n);
  qp.G.resize(q, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) qp.E(i, j) = r();
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < n; ++j) qp.G(i, j) = r();
  if (force_feasible) {
    qp.e = qp.E * z0;
    qp.g = qp.G * z0;
    for (Index i = 0; i < q; ++i)
      if (r() > 0.0) qp.g[i] += 0.5 * (r() + 1.0);
  } else {
    qp.e.resize(m);
    qp.g.resize(q);
    for (Index i = 0; i < m; ++i) qp.e[i] = r();
    for (Index i = 0; i < q; ++i) qp.g[i] = r() - 0.6;
  }
  return qp;
}


}  // namespace oracle
