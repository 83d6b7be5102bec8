#include "surfpde/geometry.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace surfpde {

namespace {
constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec3 to_vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
}  // namespace

std::string SurfaceDescriptor::name() const {
  switch (kind) {
    case SurfaceKind::SemiTorus: return "semi-torus";
    case SurfaceKind::SemiSphere: return "semi-sphere";
    case SurfaceKind::HelicalPipe: return "helical-pipe";
    case SurfaceKind::SphereR: return "sphere";
    case SurfaceKind::Paraboloid: return "paraboloid";
    case SurfaceKind::Plane: return "plane";
  }
  return "unknown";
}

SurfaceDescriptor semi_torus() {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::SemiTorus;
  s.lo = {0.0, 0.0};
  s.hi = {2 * kPi, kPi};
  s.periodic = {true, false};
  s.boundaries = {{1, 0.0, -1.0}, {1, kPi, +1.0}};
  return s;
}

SurfaceDescriptor semi_sphere() {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::SemiSphere;
  s.radius = 1.0;
  s.lo = {0.0, 0.0};
  s.hi = {kPi / 2, 2 * kPi};
  s.periodic = {false, true};
  s.boundaries = {{0, kPi / 2, +1.0}};
  return s;
}

SurfaceDescriptor helical_pipe() {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::HelicalPipe;
  s.lo = {0.0, 0.0};
  s.hi = {2 * kPi, 3 * kPi};
  s.periodic = {true, false};
  s.boundaries = {{1, 0.0, -1.0}, {1, 3 * kPi, +1.0}};
  return s;
}

SurfaceDescriptor full_sphere(double radius) {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::SphereR;
  s.radius = radius;
  s.lo = {0.0, 0.0};
  s.hi = {kPi, 2 * kPi};
  s.periodic = {false, true};
  return s;
}

SurfaceDescriptor paraboloid() {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::Paraboloid;
  s.lo = {-1.4, -1.4};
  s.hi = {1.4, 1.4};
  s.boundaries = {{0, -1.4, -1.0}, {0, 1.4, +1.0}, {1, -1.4, -1.0}, {1, 1.4, +1.0}};
  return s;
}

SurfaceDescriptor flat_square(double half) {
  SurfaceDescriptor s;
  s.kind = SurfaceKind::Plane;
  s.lo = {-half, -half};
  s.hi = {half, half};
  s.boundaries = {{0, -half, -1.0}, {0, half, +1.0}, {1, -half, -1.0}, {1, half, +1.0}};
  return s;
}

SurfaceDescriptor surface_from_name(std::string_view name) {
  if (name == "semi-torus") return semi_torus();
  if (name == "semi-sphere") return semi_sphere();
  if (name == "helical-pipe") return helical_pipe();
  if (name == "sphere") return full_sphere();
  if (name == "paraboloid") return paraboloid();
  if (name == "plane") return flat_square();
  throw DomainError("unknown surface '" + std::string(name) + "'");
}

ParamPoint to_domain(const SurfaceDescriptor& s, ParamPoint p) {
  double c[2] = {p.psi1, p.psi2};
  for (int i = 0; i < 2; ++i) {
    if (!std::isfinite(c[i])) throw DomainError("non-finite parameter");
    if (s.periodic[i]) {
      const double period = s.hi[i] - s.lo[i];
      c[i] = s.lo[i] + std::fmod(c[i] - s.lo[i], period);
      if (c[i] < s.lo[i]) c[i] += period;
      if (c[i] >= s.hi[i]) c[i] -= period;
    } else if (c[i] < s.lo[i] - 1e-12 || c[i] > s.hi[i] + 1e-12) {
      throw DomainError("parameter " + std::to_string(c[i]) + " outside [" + std::to_string(s.lo[i]) + ", " +
                        std::to_string(s.hi[i]) + "] on " + s.name());
    }
  }
  return {c[0], c[1]};
}

Vec3 embed(const SurfaceDescriptor& s, ParamPoint p) {
  p = to_domain(s, p);
  return to_vec(embed_map<double>(s, p.psi1, p.psi2));
}

EmbeddingJet embed_jet(const SurfaceDescriptor& s, ParamPoint p) {
  const auto x = embed_map<Jet2>(s, Jet2::variable(p.psi1, 0), Jet2::variable(p.psi2, 1));
  EmbeddingJet out;
  for (int c = 0; c < 3; ++c) {
    out.x[c] = x[c].v;
    for (int i = 0; i < 2; ++i) {
      out.dx[i][c] = x[c].d[i];
      for (int j = 0; j < 2; ++j) out.ddx[i][j][c] = x[c].h[i][j];
    }
  }
  return out;
}

Eigen::Matrix2d metric(const SurfaceDescriptor& s, ParamPoint p) {
  const auto e = embed_jet(s, p);
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = e.dx[i].dot(e.dx[j]);
  return g;
}

Frame tangent_frame(const SurfaceDescriptor& s, ParamPoint p) {
  p = to_domain(s, p);
  const auto e = embed_jet(s, p);
  const double n1 = e.dx[0].norm();
  if (n1 < 1e-14) throw GeometryError("degenerate parameterization: dx/dpsi1 vanishes");
  Frame f;
  f.origin = e.x;
  f.t1 = e.dx[0] / n1;
  Vec3 v = e.dx[1] - f.t1.dot(e.dx[1]) * f.t1;
  const double n2 = v.norm();
  if (n2 < 1e-14 * std::max(1.0, e.dx[1].norm())) throw GeometryError("degenerate parameterization: rank < 2");
  f.t2 = v / n2;
  // one re-orthogonalization pass keeps |t1.t2| at rounding level
  f.t2 -= f.t1.dot(f.t2) * f.t1;
  f.t2.normalize();
  return f;
}

std::optional<int> boundary_curve_of(const SurfaceDescriptor& s, ParamPoint p, double tol) {
  const double c[2] = {p.psi1, p.psi2};
  for (std::size_t b = 0; b < s.boundaries.size(); ++b) {
    const auto& bc = s.boundaries[b];
    if (std::abs(c[bc.fixed_coord] - bc.value) <= tol) return static_cast<int>(b);
  }
  return std::nullopt;
}

Vec3 outward_conormal(const SurfaceDescriptor& s, ParamPoint p) {
  const auto curve = boundary_curve_of(s, p);
  if (!curve) throw DomainError("point is not on a boundary curve of " + s.name());
  p = to_domain(s, p);
  const auto& bc = s.boundaries[*curve];
  const auto e = embed_jet(s, p);
  const Vec3 along = e.dx[1 - bc.fixed_coord].normalized();
  Vec3 n = e.dx[bc.fixed_coord] - along.dot(e.dx[bc.fixed_coord]) * along;
  const double len = n.norm();
  if (len < 1e-14) throw GeometryError("degenerate boundary co-normal");
  return bc.outward_sign * n / len;
}

double surface_area(const SurfaceDescriptor& s, int resolution) {
  const double d1 = (s.hi[0] - s.lo[0]) / resolution;
  const double d2 = (s.hi[1] - s.lo[1]) / resolution;
  double area = 0.0;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      const ParamPoint p{s.lo[0] + (i + 0.5) * d1, s.lo[1] + (j + 0.5) * d2};
      const auto e = embed_jet(s, p);
      area += e.dx[0].cross(e.dx[1]).norm() * d1 * d2;
    }
  return area;
}

double boundary_length(const SurfaceDescriptor& s, int resolution) {
  double len = 0.0;
  for (const auto& bc : s.boundaries) {
    const int free = 1 - bc.fixed_coord;
    const double d = (s.hi[free] - s.lo[free]) / resolution;
    for (int i = 0; i < resolution; ++i) {
      double c[2];
      c[bc.fixed_coord] = bc.value;
      c[free] = s.lo[free] + (i + 0.5) * d;
      len += embed_jet(s, {c[0], c[1]}).dx[free].norm() * d;
    }
  }
  return len;
}

Index boundary_count_for(const SurfaceDescriptor& s, Index n_total) {
  if (!s.has_boundary()) return 0;
  const double spacing = std::sqrt(surface_area(s, 200) / static_cast<double>(n_total));
  const auto curves = static_cast<double>(s.boundaries.size());
  const double per_curve = boundary_length(s, 1000) / spacing / curves;
  const Index even = 2 * static_cast<Index>(std::llround(per_curve / 2.0));
  return std::max<Index>(2, even) * static_cast<Index>(s.boundaries.size());
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) ^ (stream * 0x9e3779b97f4a7c15ULL));
  const std::uint64_t bits = splitmix64(key ^ splitmix64(counter));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

PointCloud make_cloud(const SurfaceDescriptor& s, const std::vector<ParamPoint>& interior,
                      const std::vector<ParamPoint>& boundary) {
  PointCloud c;
  c.surface = s;
  c.n_interior = static_cast<Index>(interior.size());
  c.n_boundary = static_cast<Index>(boundary.size());
  const auto total = interior.size() + boundary.size();
  c.ambient.reserve(total);
  c.params.reserve(total);
  c.frames.reserve(total);
  c.conormals.reserve(total);
  auto push = [&](ParamPoint p, bool on_boundary) {
    p = to_domain(s, p);
    c.params.push_back(p);
    c.ambient.push_back(embed(s, p));
    c.frames.push_back(tangent_frame(s, p));
    if (on_boundary)
      c.conormals.emplace_back(outward_conormal(s, p));
    else
      c.conormals.emplace_back(std::nullopt);
  };
  for (const auto& p : interior) push(p, false);
  for (const auto& p : boundary) push(p, true);
  return c;
}

PointCloud sample_cloud(const SurfaceDescriptor& s, Index n_interior, Index n_boundary, std::uint64_t seed) {
  if (n_interior <= 0) throw DomainError("sample_cloud: interior count must be positive");
  if (n_boundary < 0 || (n_boundary > 0 && !s.has_boundary()))
    throw DomainError("sample_cloud: boundary count incompatible with " + s.name());
  std::vector<ParamPoint> interior(static_cast<std::size_t>(n_interior));
  for (Index i = 0; i < n_interior; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    interior[i] = {s.lo[0] + (s.hi[0] - s.lo[0]) * uniform01(seed, 0, 2 * u),
                   s.lo[1] + (s.hi[1] - s.lo[1]) * uniform01(seed, 0, 2 * u + 1)};
  }
  std::vector<ParamPoint> boundary;
  boundary.reserve(static_cast<std::size_t>(n_boundary));
  const auto curves = static_cast<Index>(s.boundaries.size());
  for (Index b = 0; b < curves && n_boundary > 0; ++b) {
    const Index count = n_boundary / curves + (b < n_boundary % curves ? 1 : 0);
    const auto& bc = s.boundaries[b];
    const int free = 1 - bc.fixed_coord;
    for (Index k = 0; k < count; ++k) {
      double c[2];
      c[bc.fixed_coord] = bc.value;
      c[free] = s.lo[free] + (s.hi[free] - s.lo[free]) *
                                 uniform01(seed, 1 + static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(k));
      boundary.push_back({c[0], c[1]});
    }
  }
  return make_cloud(s, interior, boundary);
}

PointCloud sample_cloud_total(const SurfaceDescriptor& s, Index n_total, std::uint64_t seed) {
  const Index nb = boundary_count_for(s, n_total);
  return sample_cloud(s, n_total - nb, nb, seed);
}

void write_cloud(std::ostream& os, const PointCloud& cloud) {
  os.precision(17);
  for (Index i = 0; i < cloud.size(); ++i) {
    const auto& x = cloud.ambient[i];
    const auto& p = cloud.params[i];
    const Vec3 n = cloud.conormals[i].value_or(Vec3::Zero());
    os << i << ' ' << x[0] << ' ' << x[1] << ' ' << x[2] << ' ' << p.psi1 << ' ' << p.psi2 << ' '
       << (cloud.is_boundary(i) ? 1 : 0) << ' ' << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  }
}

Jet2 field_jet(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t) {
  const Jet2 a = Jet2::variable(p.psi1, 0), b = Jet2::variable(p.psi2, 1);
  return u.jet(a, b, embed_map<Jet2>(s, a, b), t);
}

double field_value(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t) {
  return field_jet(s, u, p, t).v;
}

double intrinsic_laplacian(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t) {
  const auto e = embed_jet(s, p);
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = e.dx[i].dot(e.dx[j]);
  if (std::abs(g.determinant()) < 1e-300) throw GeometryError("singular metric");
  const Eigen::Matrix2d ginv = g.inverse();
  const Jet2 f = field_jet(s, u, p, t);
  double lap = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double christoffel_term = 0.0;
      for (int k = 0; k < 2; ++k) {
        double gamma_k = 0.0;
        for (int l = 0; l < 2; ++l) gamma_k += ginv(k, l) * e.dx[l].dot(e.ddx[i][j]);
        christoffel_term += gamma_k * f.d[k];
      }
      lap += ginv(i, j) * (f.h[i][j] - christoffel_term);
    }
  return lap;
}

Vec3 surface_gradient(const SurfaceDescriptor& s, const ScalarField& u, ParamPoint p, double t) {
  const auto e = embed_jet(s, p);
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = e.dx[i].dot(e.dx[j]);
  const Eigen::Matrix2d ginv = g.inverse();
  const Jet2 f = field_jet(s, u, p, t);
  Vec3 grad = Vec3::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) grad += ginv(i, j) * f.d[j] * e.dx[i];
  return grad;
}

}  // namespace surfpde
