#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "surfpde/jet.hpp"

namespace surfpde {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Index = std::int64_t;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SurfaceKind { SemiTorus, SemiSphere, HelicalPipe, SphereR, Paraboloid, Plane };

/// A boundary curve sits on the edge `fixed_coord == value` of the parameter
/// rectangle; `outward_sign` is +1 when the exterior lies at larger values.
struct BoundaryCurve {
  int fixed_coord = 1;
  double value = 0.0;
  double outward_sign = -1.0;
};

struct SurfaceDescriptor {
  SurfaceKind kind = SurfaceKind::SemiTorus;
  double major_radius = 2.0;  // torus centerline radius
  double minor_radius = 1.0;  // torus tube radius
  double radius = 1.0;        // sphere radius
  double pipe_a = 8.0;        // helix spiral radius
  double pipe_b = 1.0;        // helix vertical growth
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
  std::array<bool, 2> periodic{false, false};
  std::vector<BoundaryCurve> boundaries;

  std::string name() const;
  bool has_boundary() const { return !boundaries.empty(); }
};

SurfaceDescriptor semi_torus();
SurfaceDescriptor semi_sphere();
SurfaceDescriptor helical_pipe();
SurfaceDescriptor full_sphere(double radius = 0.5);
SurfaceDescriptor paraboloid();
/// Flat square [-half, half]^2 in the z = 0 plane, bounded on all four sides.
SurfaceDescriptor flat_square(double half = 1.0);

/// Accepts the names produced by SurfaceDescriptor::name().
SurfaceDescriptor surface_from_name(std::string_view name);

struct ParamPoint {
  double psi1 = 0.0;
  double psi2 = 0.0;
};

struct Frame {
  Vec3 origin = Vec3::Zero();
  Vec3 t1 = Vec3::UnitX();
  Vec3 t2 = Vec3::UnitY();
};

/// Analytic parameterization, usable with double, long double and Jet2.
/// No domain checking: the maps extend smoothly past the rectangle.
template <class T>
std::array<T, 3> embed_map(const SurfaceDescriptor& s, const T& p1, const T& p2) {
  using std::cos;
  using std::sin;
  switch (s.kind) {
    case SurfaceKind::SemiTorus: {
      T ring = T(s.major_radius) + T(s.minor_radius) * cos(p1);
      return {ring * cos(p2), ring * sin(p2), T(s.minor_radius) * sin(p1)};
    }
    case SurfaceKind::SemiSphere:
    case SurfaceKind::SphereR: {
      T r = T(s.radius);
      return {r * sin(p1) * cos(p2), r * sin(p1) * sin(p2), r * cos(p1)};
    }
    case SurfaceKind::HelicalPipe: {
      const double a = s.pipe_a, b = s.pipe_b;
      const double alpha = a / std::sqrt(a * a + b * b);
      const double beta = b / std::sqrt(a * a + b * b);
      T R = T(3.0 / 5.0) + T(3.0 / 40.0) * sin(T(5.0) * p1);
      return {T(a) * cos(p2) + R * (T(beta) * sin(p1) * sin(p2) - cos(p1) * cos(p2)),
              T(a) * sin(p2) - R * (T(beta) * sin(p1) * cos(p2) + cos(p1) * sin(p2)),
              T(b) * p2 + R * T(alpha) * sin(p1)};
    }
    case SurfaceKind::Paraboloid:
      return {p1, p2, p1 * p1 + p2 * p2};
    case SurfaceKind::Plane:
      return {p1, p2, T(0.0)};
  }
  return {T(0.0), T(0.0), T(0.0)};
}

/// Wraps periodic coordinates into [lo, hi); throws DomainError when a
/// non-periodic coordinate is outside its closed interval.
ParamPoint to_domain(const SurfaceDescriptor& s, ParamPoint p);

Vec3 embed(const SurfaceDescriptor& s, ParamPoint p);

/// Position with first and second parametric derivatives.
struct EmbeddingJet {
  Vec3 x;
  std::array<Vec3, 2> dx;
  std::array<std::array<Vec3, 2>, 2> ddx;
};
EmbeddingJet embed_jet(const SurfaceDescriptor& s, ParamPoint p);

Eigen::Matrix2d metric(const SurfaceDescriptor& s, ParamPoint p);

/// Gram-Schmidt on {dx/dpsi1, dx/dpsi2}, t1 along dx/dpsi1.
Frame tangent_frame(const SurfaceDescriptor& s, ParamPoint p);

/// Index into s.boundaries of the curve containing p, if any.
std::optional<int> boundary_curve_of(const SurfaceDescriptor& s, ParamPoint p, double tol = 1e-12);

Vec3 outward_conormal(const SurfaceDescriptor& s, ParamPoint p);

/// Projection onto the frame's tangent plane, relative to the frame origin.
inline Vec2 monge_coords(const Frame& f, const Vec3& x) {
  const Vec3 d = x - f.origin;
  return {f.t1.dot(d), f.t2.dot(d)};
}

/// Total boundary length and surface area (midpoint quadrature).
double surface_area(const SurfaceDescriptor& s, int resolution = 400);
double boundary_length(const SurfaceDescriptor& s, int resolution = 2000);

/// Boundary node count for a cloud of N total nodes: boundary spacing
/// matched to interior spacing, rounded to an even count per curve.
Index boundary_count_for(const SurfaceDescriptor& s, Index n_total);

/// Counter-based uniform variate in the open interval (0, 1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

struct PointCloud {
  SurfaceDescriptor surface;
  std::vector<Vec3> ambient;
  std::vector<ParamPoint> params;
  std::vector<Frame> frames;
  std::vector<std::optional<Vec3>> conormals;
  Index n_interior = 0;
  Index n_boundary = 0;

  Index size() const { return static_cast<Index>(ambient.size()); }
  bool is_boundary(Index i) const { return i >= n_interior; }
};

/// Interior nodes i.i.d. uniform on the open parameter rectangle, boundary
/// nodes i.i.d. uniform along each curve; interior first, boundary last.
PointCloud sample_cloud(const SurfaceDescriptor& s, Index n_interior, Index n_boundary, std::uint64_t seed);

/// Cloud of N total nodes with the boundary count from boundary_count_for.
PointCloud sample_cloud_total(const SurfaceDescriptor& s, Index n_total, std::uint64_t seed);

/// Assembles a cloud from explicit parameter points (frames and co-normals
/// computed analytically). Boundary points must lie on a declared curve.
PointCloud make_cloud(const SurfaceDescriptor& s, const std::vector<ParamPoint>& interior,
                      const std::vector<ParamPoint>& boundary);

/// One node per line: `index x y z psi1 psi2 is_boundary nx ny nz`.
void write_cloud(std::ostream& os, const PointCloud& cloud);

/// Smooth scalar field on the surface, written once as a generic callable
/// of (psi1, psi2, ambient x, t) and instantiated for jets (analytic
/// derivatives) and long double (finite-difference checks).
struct ScalarField {
  std::function<Jet2(const Jet2&, const Jet2&, const std::array<Jet2, 3>&, double)> jet;
  std::function<long double(long double, long double, const std::array<long double, 3>&, double)> ld;
};

template <class F>
ScalarField make_field(F f) {
  ScalarField out;
  out.jet = [f](const Jet2& a, const Jet2& b, const std::array<Jet2, 3>& x, double t) { return f(a, b, x, t); };
  out.ld = [f](long double a, long double b, const std::array<long double, 3>& x, double t) {
    return f(a, b, x, t);
  };
  return out;
}

/// Field value with its exact parametric derivatives.
Jet2 field_jet(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t = 0.0);
double field_value(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t = 0.0);

/// Laplace-Beltrami operator via g^{ij}(u_ij - Gamma^k_ij u_k) with exact
/// derivatives of the parameterization.
double intrinsic_laplacian(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t = 0.0);

/// Ambient surface gradient g^{ij} u_j dx/dpsi_i.
Vec3 surface_gradient(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t = 0.0);

}  // namespace surfpde
