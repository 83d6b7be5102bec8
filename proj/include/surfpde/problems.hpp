#pragma once

#include <map>
#include <optional>

#include "surfpde/geometry.hpp"

namespace surfpde {

/// Poisson and consistency tests: sin(psi1) cos(psi2 + pi/4).
ScalarField poisson_solution();

/// Spatial factor v of the heat solution u = exp(-t) v: sin(x1) cos(x2) on
/// the semi-sphere, sin(psi1) cos(psi2) elsewhere.
ScalarField heat_profile(const SurfaceDescriptor& s);

/// Reference eigenvalues of -Laplace-Beltrami with u + du/dn = 0, by mode
/// index (1-based). Empty for surfaces without tabulated values.
std::map<int, double> reference_eigenvalues(const SurfaceDescriptor& s);

/// Values, Laplacians and co-normal derivatives of a field on a cloud.
struct FieldSamples {
  Eigen::VectorXd value;      // all nodes
  Eigen::VectorXd laplacian;  // interior nodes
  Eigen::VectorXd conormal;   // boundary nodes
};
FieldSamples sample_field(const PointCloud& cloud, const ScalarField& u, double t = 0.0);

}  // namespace surfpde
