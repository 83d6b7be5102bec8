#pragma once
// Interface solve with zero jumps against the plain single-domain solve on
// the same positions.

#include <algorithm>
#include <cmath>

#include "surfpde/interface.hpp"

namespace oracle {

inline double trivial_jump_mismatch(surfpde::Index N, std::uint64_t seed) {
  using namespace surfpde;
  const InterfaceProblem pb = plane_trivial_problem();
  const InterfaceCloud c = sample_interface_cloud(pb, N, seed);
  const AutotuneConfig cfg;
  const InterfaceSystem isys = assemble_interface_system(pb, c, cfg);
  const Eigen::VectorXd u = SparseLU(isys.A).solve(isys.rhs);

  // each position once: bulk and interface nodes interior, outer nodes boundary
  std::vector<ParamPoint> interior, boundary;
  const Index nb = c.n_plus + c.n_minus;
  for (Index i = 0; i < nb; ++i) interior.push_back(c.nodes.params[std::size_t(i)]);
  for (Index g = 0; g < c.n_interface; ++g) interior.push_back(c.nodes.params[std::size_t(c.plus_copy(g))]);
  for (Index o = 0; o < c.n_outer; ++o) boundary.push_back(c.nodes.params[std::size_t(c.outer(o))]);
  const PointCloud cloud = make_cloud(pb.surface, interior, boundary);
  const SparseMatrix L = assemble_interior(cloud, cfg).matrix();
  const SparseMatrix B = assemble_boundary(cloud, cfg, true).matrix();
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it) trips.emplace_back(int(it.row()), int(it.col()), -it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it)
      trips.emplace_back(int(cloud.n_interior + it.row()), int(it.col()), it.value());
  for (Index i = 0; i < cloud.n_interior; ++i) trips.emplace_back(int(i), int(i), 1.0);
  SparseMatrix M(cloud.size(), cloud.size());
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd rhs(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    const ParamPoint p = cloud.params[std::size_t(i)];
    const double v = field_value(pb.surface, pb.u_plus, p);
    rhs[i] = i < cloud.n_interior
                 ? -intrinsic_laplacian(pb.surface, pb.u_plus, p) + v
                 : v + surface_gradient(pb.surface, pb.u_plus, p).dot(*cloud.conormals[std::size_t(i)]);
  }
  const Eigen::VectorXd v = SparseLU(M).solve(rhs);

  double diff = 0.0;
  for (Index i = 0; i < nb; ++i) diff = std::max(diff, std::abs(u[i] - v[i]));
  for (Index g = 0; g < c.n_interface; ++g) {
    diff = std::max(diff, std::abs(u[c.plus_copy(g)] - v[nb + g]));
    diff = std::max(diff, std::abs(u[c.minus_copy(g)] - v[nb + g]));
  }
  for (Index o = 0; o < c.n_outer; ++o) diff = std::max(diff, std::abs(u[c.outer(o)] - v[cloud.n_interior + o]));
  return diff;
}

}  // namespace oracle
