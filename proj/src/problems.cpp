#include "surfpde/problems.hpp"

#include <cmath>
#include <numbers>

namespace surfpde {

ScalarField poisson_solution() {
  return make_field([](const auto& p1, const auto& p2, const auto&, double) {
    using std::cos;
    using std::sin;
    using T = std::decay_t<decltype(p1)>;
    return sin(p1) * cos(p2 + T(std::numbers::pi / 4));
  });
}

ScalarField heat_profile(const SurfaceDescriptor& s) {
  if (s.kind == SurfaceKind::SemiSphere)
    return make_field([](const auto&, const auto&, const auto& x, double) {
      using std::cos;
      using std::sin;
      return sin(x[0]) * cos(x[1]);
    });
  return make_field([](const auto& p1, const auto& p2, const auto&, double) {
    using std::cos;
    using std::sin;
    return sin(p1) * cos(p2);
  });
}

std::map<int, double> reference_eigenvalues(const SurfaceDescriptor& s) {
  // P2 finite elements on a 300 x 300 parameter grid
  switch (s.kind) {
    case SurfaceKind::SemiTorus:
      return {{1, 0.1468539}, {2, 0.5501428}, {4, 1.137836}, {8, 2.268830}, {20, 5.571232}};
    case SurfaceKind::SemiSphere:
      return {{1, 0.7055983}, {2, 3.156904}, {4, 7.153786}, {8, 13.24604}, {20, 32.31781}};
    default:
      return {};
  }
}

FieldSamples sample_field(const PointCloud& cloud, const ScalarField& u, double t) {
  const SurfaceDescriptor& s = cloud.surface;
  FieldSamples out;
  out.value.resize(cloud.size());
  out.laplacian.resize(cloud.n_interior);
  out.conormal.resize(cloud.n_boundary);
  for (Index i = 0; i < cloud.size(); ++i) {
    const ParamPoint p = cloud.params[static_cast<std::size_t>(i)];
    out.value[i] = field_value(s, u, p, t);
    if (i < cloud.n_interior)
      out.laplacian[i] = intrinsic_laplacian(s, u, p, t);
    else
      out.conormal[i - cloud.n_interior] = surface_gradient(s, u, p, t).dot(*cloud.conormals[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace surfpde
