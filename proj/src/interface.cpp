#include "surfpde/interface.hpp"

#include <cmath>
#include <numbers>

namespace surfpde {

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Index> id_range(Index begin, Index end) {
  std::vector<Index> ids;
  for (Index i = begin; i < end; ++i) ids.push_back(i);
  return ids;
}

double forcing(const InterfaceProblem& pb, int side, ParamPoint p) {
  const ScalarField& u = pb.exact(side);
  return -pb.coefficient(side) * intrinsic_laplacian(pb.surface, u, p) + pb.reaction(side) * field_value(pb.surface, u, p);
}
}  // namespace

double star_radius(double t) { return 0.7 + 0.3 * std::cos(5.0 * (t - 11.0 * kPi / 13.0)); }

InterfaceProblem sphere_equator_problem() {
  InterfaceProblem pb;
  pb.name = "sphere-equator";
  pb.surface = full_sphere(0.5);
  pb.level = [](ParamPoint p) { return kPi / 2 - p.psi1; };
  pb.curve = [](double t) { return ParamPoint{kPi / 2, t}; };
  pb.curve_tangent = [](double) { return Vec2(0.0, 1.0); };
  pb.period = 2 * kPi;
  pb.c_plus = 1.0;
  pb.c_minus = 10.0;
  pb.sigma_plus = pb.sigma_minus = 1.0;
  pb.u_plus = make_field([](const auto&, const auto&, const auto& x, double) {
    using std::sin;
    using T = std::decay_t<decltype(x[0])>;
    return x[0] * x[1] * sin(T(4 * kPi) * x[2]);
  });
  pb.u_minus = make_field([](const auto&, const auto&, const auto& x, double) {
    using std::cos;
    using T = std::decay_t<decltype(x[0])>;
    return x[0] * x[1] * cos(T(4 * kPi) * x[2]);
  });
  return pb;
}

InterfaceProblem paraboloid_star_problem() {
  InterfaceProblem pb;
  pb.name = "paraboloid-star";
  pb.surface = paraboloid();
  pb.level = [](ParamPoint p) { return star_radius(std::atan2(p.psi2, p.psi1)) - std::hypot(p.psi1, p.psi2); };
  pb.curve = [](double t) {
    const double r = star_radius(t);
    return ParamPoint{r * std::cos(t), r * std::sin(t)};
  };
  pb.curve_tangent = [](double t) {
    const double r = star_radius(t), dr = -1.5 * std::sin(5.0 * (t - 11.0 * kPi / 13.0));
    return Vec2(dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t));
  };
  pb.period = 2 * kPi;
  pb.c_plus = 2.0;
  pb.c_minus = 1.0;
  pb.sigma_plus = 1.0;
  pb.sigma_minus = 3.0;
  pb.u_plus = make_field([](const auto&, const auto&, const auto& x, double) {
    using T = std::decay_t<decltype(x[0])>;
    return (x[0] * x[0] - T(1.0)) * (x[1] * x[1] - T(1.0));
  });
  pb.u_minus = make_field([](const auto&, const auto&, const auto& x, double) {
    using std::cos;
    using std::sin;
    return cos(x[0] + x[1]) * sin(x[2]);
  });
  return pb;
}

InterfaceProblem plane_trivial_problem() {
  InterfaceProblem pb;
  pb.name = "plane-trivial";
  pb.surface = flat_square(1.0);
  pb.level = [](ParamPoint p) { return 0.5 - std::hypot(p.psi1, p.psi2); };
  pb.curve = [](double t) { return ParamPoint{0.5 * std::cos(t), 0.5 * std::sin(t)}; };
  pb.curve_tangent = [](double t) { return Vec2(-0.5 * std::sin(t), 0.5 * std::cos(t)); };
  pb.period = 2 * kPi;
  pb.u_plus = make_field([](const auto&, const auto&, const auto& x, double) {
    using T = std::decay_t<decltype(x[0])>;
    return x[0] * x[0] + T(0.5) * x[0] * x[1] - T(0.7) * x[1] * x[1] + T(0.3) * x[0] - T(0.2);
  });
  pb.u_minus = pb.u_plus;
  return pb;
}

InterfaceProblem interface_problem_for(const SurfaceDescriptor& s) {
  switch (s.kind) {
    case SurfaceKind::SphereR: return sphere_equator_problem();
    case SurfaceKind::Paraboloid: return paraboloid_star_problem();
    case SurfaceKind::Plane: return plane_trivial_problem();
    default: throw DomainError("no interface problem defined on " + s.name());
  }
}

std::vector<int> tag_sides(const InterfaceProblem& problem, const std::vector<ParamPoint>& points) {
  std::vector<int> side(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = problem.level(points[i]);
    if (std::abs(d) < 1e-12)
      throw GeometryError("node " + std::to_string(i) + " lies on the interface; resample with another seed");
    side[i] = d > 0.0 ? 1 : -1;
  }
  return side;
}

Vec3 interface_normal(const InterfaceProblem& problem, double t) {
  const ParamPoint p = problem.curve(t);
  const EmbeddingJet e = embed_jet(problem.surface, p);
  const Vec2 ct = problem.curve_tangent(t);
  const Vec3 tangent = e.dx[0] * ct[0] + e.dx[1] * ct[1];
  const Vec3 surface_normal = e.dx[0].cross(e.dx[1]).normalized();
  Vec3 n = tangent.cross(surface_normal).normalized();
  // orient by the level function along the pulled-back direction
  Eigen::Matrix<double, 3, 2> J;
  J << e.dx[0], e.dx[1];
  const Vec2 d = (J.transpose() * J).ldlt().solve(J.transpose() * n).normalized();
  const double eps = 1e-6;
  const double up = problem.level({p.psi1 + eps * d[0], p.psi2 + eps * d[1]});
  const double down = problem.level({p.psi1 - eps * d[0], p.psi2 - eps * d[1]});
  if (up < down) n = -n;
  return n;
}

double jump_value(const InterfaceProblem& problem, double t) {
  const ParamPoint p = to_domain(problem.surface, problem.curve(t));
  return field_value(problem.surface, problem.u_plus, p) - field_value(problem.surface, problem.u_minus, p);
}

double jump_flux(const InterfaceProblem& problem, double t) {
  const ParamPoint p = to_domain(problem.surface, problem.curve(t));
  const Vec3 n = interface_normal(problem, t);
  return problem.c_plus * surface_gradient(problem.surface, problem.u_plus, p).dot(n) -
         problem.c_minus * surface_gradient(problem.surface, problem.u_minus, p).dot(n);
}

InterfaceCloud sample_interface_cloud(const InterfaceProblem& problem, Index N, std::uint64_t seed) {
  const SurfaceDescriptor& s = problem.surface;
  const auto nG = static_cast<Index>(std::llround(2.5 * std::sqrt(static_cast<double>(N))));
  const Index nO = boundary_count_for(s, N);
  const Index nBulk = N - nG - nO;
  if (nBulk <= 0) throw DomainError("interface cloud: N too small");
  const PointCloud base = sample_cloud(s, nBulk, nO, seed);
  const std::vector<ParamPoint> bulk(base.params.begin(), base.params.begin() + nBulk);
  const std::vector<int> bulk_side = tag_sides(problem, bulk);

  InterfaceCloud c;
  PointCloud& out = c.nodes;
  out.surface = s;
  auto push = [&](Index from_base, int side) {
    out.ambient.push_back(base.ambient[static_cast<std::size_t>(from_base)]);
    out.params.push_back(base.params[static_cast<std::size_t>(from_base)]);
    out.frames.push_back(base.frames[static_cast<std::size_t>(from_base)]);
    out.conormals.push_back(base.conormals[static_cast<std::size_t>(from_base)]);
    c.side.push_back(side);
  };
  for (int want : {1, -1})
    for (Index i = 0; i < nBulk; ++i)
      if (bulk_side[static_cast<std::size_t>(i)] == want) {
        push(i, want);
        (want > 0 ? c.n_plus : c.n_minus) += 1;
      }

  c.n_interface = nG;
  std::vector<ParamPoint> gp;
  // equal parameter steps from a random phase; independent draws can put
  // two interface nodes almost on top of each other
  const double phase = uniform01(seed, 100, 0);
  for (Index g = 0; g < nG; ++g) {
    const double t = problem.period * (double(g) + phase) / double(nG);
    c.curve_t.push_back(t);
    c.normal.push_back(interface_normal(problem, t));
    gp.push_back(to_domain(s, problem.curve(t)));
  }
  for (int side : {1, -1})
    for (Index g = 0; g < nG; ++g) {
      const ParamPoint p = gp[static_cast<std::size_t>(g)];
      out.params.push_back(p);
      out.ambient.push_back(embed(s, p));
      out.frames.push_back(tangent_frame(s, p));
      // outward from this side's subdomain
      out.conormals.emplace_back(side > 0 ? Vec3(-c.normal[static_cast<std::size_t>(g)])
                                          : c.normal[static_cast<std::size_t>(g)]);
      c.side.push_back(side);
    }
  c.n_outer = nO;
  for (Index o = 0; o < nO; ++o) {
    const ParamPoint p = base.params[static_cast<std::size_t>(nBulk + o)];
    if (problem.level(p) > 0.0) throw GeometryError("outer boundary must lie on the - side");
    push(nBulk + o, -1);
  }
  out.n_interior = c.n_plus + c.n_minus;
  out.n_boundary = 2 * nG + nO;
  return c;
}

InterfaceSystem assemble_interface_system(const InterfaceProblem& problem, const InterfaceCloud& cloud,
                                          const AutotuneConfig& cfg, Execution exec) {
  cfg.validate();
  const auto& pts = cloud.nodes.ambient;
  const Index nP = cloud.n_plus, nM = cloud.n_minus, nG = cloud.n_interface, nO = cloud.n_outer;
  const Index n = cloud.size();

  std::vector<Index> plus_all = id_range(0, nP), minus_all = id_range(nP, nP + nM);
  for (Index g = 0; g < nG; ++g) {
    plus_all.push_back(cloud.plus_copy(g));
    minus_all.push_back(cloud.minus_copy(g));
  }
  for (Index o = 0; o < nO; ++o) minus_all.push_back(cloud.outer(o));
  const SpatialIndex idx_plus(pts, plus_all), idx_minus(pts, minus_all);
  const SpatialIndex bulk_plus(pts, id_range(0, nP)), bulk_minus(pts, id_range(nP, nP + nM));

  auto bulk_row = [&](Index i, const SpatialIndex& idx) {
    const Stencil st = knn(idx, pts, i, std::min(cfg.K_max, idx.size()));
    return interior_row_from_candidates(pts, cloud.nodes.frames[static_cast<std::size_t>(i)], st.neighbors, cfg);
  };
  auto one_sided_row = [&](Index i, const SpatialIndex& bulk) {
    const Vec3& nv = *cloud.nodes.conormals[static_cast<std::size_t>(i)];
    const Stencil st = restricted_knn(bulk, pts, i, nv, std::min(cfg.K_max, bulk.size() + 1), cfg.omega);
    return boundary_row_from_candidates(pts, cloud.nodes.frames[static_cast<std::size_t>(i)], nv, st.neighbors, cfg);
  };

  // bulk rows, then + and - flux rows per interface node, then outer rows
  std::vector<WeightRow> rows(static_cast<std::size_t>(nP + nM + 2 * nG + nO));
  for_each_node(static_cast<Index>(rows.size()), exec, [&](Index r) {
    if (r < nP)
      rows[r] = bulk_row(r, idx_plus);
    else if (r < nP + nM)
      rows[r] = bulk_row(r, idx_minus);
    else if (r < nP + nM + nG)
      rows[r] = one_sided_row(cloud.plus_copy(r - nP - nM), bulk_plus);
    else if (r < nP + nM + 2 * nG)
      rows[r] = one_sided_row(cloud.minus_copy(r - nP - nM - nG), bulk_minus);
    else
      rows[r] = one_sided_row(r, bulk_minus);
  });

  InterfaceSystem sys;
  sys.rhs.resize(n);
  std::vector<Eigen::Triplet<double>> trips;
  const SurfaceDescriptor& s = problem.surface;
  for (Index i = 0; i < nP + nM; ++i) {
    const int side = cloud.side[static_cast<std::size_t>(i)];
    const WeightRow& w = rows[i];
    for (std::size_t k = 0; k < w.indices.size(); ++k)
      trips.emplace_back(int(i), int(w.indices[k]), -problem.coefficient(side) * w.weights[k]);
    trips.emplace_back(int(i), int(i), problem.reaction(side));
    sys.rhs[i] = forcing(problem, side, cloud.nodes.params[static_cast<std::size_t>(i)]);
  }
  for (Index g = 0; g < nG; ++g) {
    const Index jp = cloud.plus_copy(g), jm = cloud.minus_copy(g);
    const double t = cloud.curve_t[static_cast<std::size_t>(g)];
    trips.emplace_back(int(jp), int(jp), 1.0);
    trips.emplace_back(int(jp), int(jm), -1.0);
    sys.rhs[jp] = jump_value(problem, t);
    // c+ grad u+ . n - c- grad u- . n, with the + row taken along -n
    const WeightRow& wp = rows[nP + nM + g];
    const WeightRow& wm = rows[nP + nM + nG + g];
    for (std::size_t k = 0; k < wp.indices.size(); ++k)
      trips.emplace_back(int(jm), int(wp.indices[k]), -problem.c_plus * wp.weights[k]);
    for (std::size_t k = 0; k < wm.indices.size(); ++k)
      trips.emplace_back(int(jm), int(wm.indices[k]), -problem.c_minus * wm.weights[k]);
    sys.rhs[jm] = jump_flux(problem, t);
  }
  for (Index o = 0; o < nO; ++o) {
    const Index i = cloud.outer(o);
    const WeightRow& w = rows[nP + nM + 2 * nG + o];
    for (std::size_t k = 0; k < w.indices.size(); ++k) trips.emplace_back(int(i), int(w.indices[k]), w.weights[k]);
    trips.emplace_back(int(i), int(i), 1.0);
    const ParamPoint p = cloud.nodes.params[static_cast<std::size_t>(i)];
    sys.rhs[i] = field_value(s, problem.u_minus, p) +
                 surface_gradient(s, problem.u_minus, p).dot(*cloud.nodes.conormals[static_cast<std::size_t>(i)]);
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.rows = std::move(rows);
  return sys;
}

Eigen::VectorXd interface_exact(const InterfaceProblem& problem, const InterfaceCloud& cloud) {
  Eigen::VectorXd u(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i)
    u[i] = field_value(problem.surface, problem.exact(cloud.side[static_cast<std::size_t>(i)]),
                       cloud.nodes.params[static_cast<std::size_t>(i)]);
  return u;
}

}  // namespace surfpde
