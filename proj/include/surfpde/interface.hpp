#pragma once

#include <functional>
#include <string>
#include <vector>

#include "surfpde/linsys.hpp"

namespace surfpde {

/// -div(c grad u) + sigma u = f on each side of a curve, with
/// [u] = q0 and [c du/dn] = q1 across it; Robin data on any outer boundary.
struct InterfaceProblem {
  std::string name;
  SurfaceDescriptor surface;
  std::function<double(ParamPoint)> level;     // > 0 on the + side
  std::function<ParamPoint(double)> curve;     // t in [0, period)
  std::function<Vec2(double)> curve_tangent;   // d curve / dt in parameter space
  double period = 0.0;
  double c_plus = 1.0, c_minus = 1.0, sigma_plus = 1.0, sigma_minus = 1.0;
  ScalarField u_plus, u_minus;  // exact solution per side

  double coefficient(int side) const { return side > 0 ? c_plus : c_minus; }
  double reaction(int side) const { return side > 0 ? sigma_plus : sigma_minus; }
  const ScalarField& exact(int side) const { return side > 0 ? u_plus : u_minus; }
};

/// 0.7 + 0.3 cos(5 (t - 11 pi / 13))
double star_radius(double t);

/// Sphere of radius 0.5 split at the equator; + is the upper half.
/// c+ = 1, c- = 10, sigma = 1; u+ = x1 x2 sin(4 pi x3), u- = x1 x2 cos(4 pi x3).
InterfaceProblem sphere_equator_problem();

/// Paraboloid over [-1.4, 1.4]^2 with a five-fold star; + is inside.
/// c+ = 2, c- = 1, sigma+ = 1, sigma- = 3; u+ = (x1^2 - 1)(x2^2 - 1),
/// u- = cos(x1 + x2) sin(x3).
InterfaceProblem paraboloid_star_problem();

/// Flat square with a circular interface of radius 0.5, equal
/// coefficients and one quadratic solution on both sides: zero jumps.
InterfaceProblem plane_trivial_problem();

InterfaceProblem interface_problem_for(const SurfaceDescriptor& s);

/// +1 / -1 per parameter point. Throws GeometryError when a point is
/// within 1e-12 of the curve (resample with another seed).
std::vector<int> tag_sides(const InterfaceProblem& problem, const std::vector<ParamPoint>& points);

/// Unit tangent-plane normal to the curve at t, pointing from - to +.
Vec3 interface_normal(const InterfaceProblem& problem, double t);

/// Jump data of the exact solution at curve parameter t.
double jump_value(const InterfaceProblem& problem, double t);
double jump_flux(const InterfaceProblem& problem, double t);

/// Unknown layout: + bulk, - bulk, interface (+ copy), interface (- copy),
/// outer boundary (on the - side). `nodes` holds one entry per unknown;
/// interface positions appear twice. Co-normals are stored for the
/// interface copies (outward from their own side) and the outer boundary.
struct InterfaceCloud {
  PointCloud nodes;
  std::vector<int> side;         // per unknown
  std::vector<double> curve_t;   // per interface node
  std::vector<Vec3> normal;      // per interface node, - to +
  Index n_plus = 0, n_minus = 0, n_interface = 0, n_outer = 0;

  Index size() const { return nodes.size(); }
  Index plus_copy(Index g) const { return n_plus + n_minus + g; }
  Index minus_copy(Index g) const { return n_plus + n_minus + n_interface + g; }
  Index outer(Index o) const { return n_plus + n_minus + 2 * n_interface + o; }
};

/// N counts distinct positions: bulk, round(2.5 sqrt(N)) interface nodes
/// and the usual outer boundary count.
InterfaceCloud sample_interface_cloud(const InterfaceProblem& problem, Index N, std::uint64_t seed);

struct InterfaceSystem {
  SparseMatrix A;
  Eigen::VectorXd rhs;
  std::vector<WeightRow> rows;  // bulk Laplacian / one-sided co-normal rows, for diagnostics
};

InterfaceSystem assemble_interface_system(const InterfaceProblem& problem, const InterfaceCloud& cloud,
                                          const AutotuneConfig& cfg, Execution exec = Execution::Parallel);

/// Exact solution per unknown.
Eigen::VectorXd interface_exact(const InterfaceProblem& problem, const InterfaceCloud& cloud);

}  // namespace surfpde
