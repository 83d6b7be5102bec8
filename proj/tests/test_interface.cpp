#include <doctest.h>

#include <cmath>
#include <numbers>

#include "surfpde/interface.hpp"
#include "trivial_jump.hpp"

using namespace surfpde;

namespace {

constexpr double kPi = std::numbers::pi;

struct Solved {
  InterfaceCloud cloud;
  InterfaceSystem sys;
  Eigen::VectorXd u;
};

Solved solve_interface(const InterfaceProblem& pb, Index N, std::uint64_t seed) {
  Solved s{sample_interface_cloud(pb, N, seed), {}, {}};
  s.sys = assemble_interface_system(pb, s.cloud, AutotuneConfig{});
  s.u = SparseLU(s.sys.A).solve(s.sys.rhs);
  return s;
}

double rms(const Eigen::VectorXd& e) { return std::sqrt(e.squaredNorm() / double(e.size())); }

}  // namespace

TEST_CASE("star radius and curve geometry") {
  CHECK(star_radius(11 * kPi / 13) == doctest::Approx(1.0));
  CHECK(star_radius(11 * kPi / 13 + kPi / 5) == doctest::Approx(0.4));
  const auto pb = paraboloid_star_problem();
  for (double t : {0.1, 1.3, 2.9, 4.4, 6.0}) {
    const ParamPoint p = pb.curve(t);
    CHECK(std::abs(pb.level(p)) < 1e-12);
    // tangent against a central difference
    const double h = 1e-6;
    const ParamPoint a = pb.curve(t + h), b = pb.curve(t - h);
    const Vec2 fd((a.psi1 - b.psi1) / (2 * h), (a.psi2 - b.psi2) / (2 * h));
    CHECK((pb.curve_tangent(t) - fd).norm() < 1e-7);
  }
}

TEST_CASE("side tagging") {
  const auto pb = sphere_equator_problem();
  const auto sides = tag_sides(pb, {{0.3, 1.0}, {2.5, 4.0}, {kPi / 2 - 1e-3, 0.0}});
  CHECK(sides == std::vector<int>{1, -1, 1});
  CHECK_THROWS_AS(tag_sides(pb, {{kPi / 2, 0.2}}), GeometryError);

  const auto star = paraboloid_star_problem();
  CHECK(tag_sides(star, {{0.0, 0.0}, {1.3, 1.3}}) == std::vector<int>{1, -1});
}

TEST_CASE("interface normals are unit, tangent and point from - to +") {
  for (const auto& pb : {sphere_equator_problem(), paraboloid_star_problem(), plane_trivial_problem()}) {
    for (double t : {0.2, 1.7, 3.3, 5.1}) {
      const Vec3 n = interface_normal(pb, t);
      const ParamPoint p = pb.curve(t);
      const EmbeddingJet e = embed_jet(pb.surface, p);
      const Vec2 ct = pb.curve_tangent(t);
      CHECK(n.norm() == doctest::Approx(1.0));
      CHECK(std::abs(n.dot(e.dx[0] * ct[0] + e.dx[1] * ct[1])) < 1e-12);
      CHECK(std::abs(n.dot(e.dx[0].cross(e.dx[1]))) < 1e-12);
      // step along n through the embedding: lands on the + side
      Eigen::Matrix<double, 3, 2> J;
      J << e.dx[0], e.dx[1];
      const Vec2 d = J.colPivHouseholderQr().solve(n);
      CHECK(pb.level({p.psi1 + 1e-4 * d[0], p.psi2 + 1e-4 * d[1]}) > 0.0);
    }
  }
  // sphere: + is the upper half
  CHECK(interface_normal(sphere_equator_problem(), 0.7).z() == doctest::Approx(1.0));
}

TEST_CASE("interface cloud layout") {
  const auto pb = paraboloid_star_problem();
  const auto c = sample_interface_cloud(pb, 1600, 3);
  CHECK(c.n_interface == 100);
  CHECK(c.n_outer == boundary_count_for(pb.surface, 1600));
  CHECK(c.n_plus + c.n_minus + c.n_interface + c.n_outer == 1600);
  CHECK(c.size() == 1600 + c.n_interface);
  for (Index i = 0; i < c.n_plus + c.n_minus; ++i)
    CHECK(c.side[std::size_t(i)] == (pb.level(c.nodes.params[std::size_t(i)]) > 0 ? 1 : -1));
  for (Index g = 0; g < c.n_interface; ++g) {
    const auto jp = std::size_t(c.plus_copy(g)), jm = std::size_t(c.minus_copy(g));
    CHECK(std::abs(pb.level(c.nodes.params[jp])) < 1e-10);
    CHECK(c.nodes.ambient[jp] == c.nodes.ambient[jm]);
    CHECK(c.side[jp] == 1);
    CHECK(c.side[jm] == -1);
    CHECK((*c.nodes.conormals[jp] + c.normal[std::size_t(g)]).norm() < 1e-15);
    CHECK((*c.nodes.conormals[jm] - c.normal[std::size_t(g)]).norm() < 1e-15);
  }
  for (Index o = 0; o < c.n_outer; ++o) CHECK(c.side[std::size_t(c.outer(o))] == -1);
}

TEST_CASE("stencils stay on their own side") {
  const auto pb = paraboloid_star_problem();
  const auto c = sample_interface_cloud(pb, 1600, 5);
  const auto sys = assemble_interface_system(pb, c, AutotuneConfig{});
  const Index nb = c.n_plus + c.n_minus;
  auto is_bulk = [&](Index j) { return j < nb; };
  for (Index r = 0; r < nb; ++r)
    for (Index j : sys.rows[std::size_t(r)].indices) CHECK(c.side[std::size_t(j)] == c.side[std::size_t(r)]);
  for (Index g = 0; g < c.n_interface; ++g) {
    const auto& wp = sys.rows[std::size_t(nb + g)];
    const auto& wm = sys.rows[std::size_t(nb + c.n_interface + g)];
    CHECK(wp.indices.front() == c.plus_copy(g));
    CHECK(wm.indices.front() == c.minus_copy(g));
    for (std::size_t k = 1; k < wp.indices.size(); ++k) CHECK((is_bulk(wp.indices[k]) && c.side[std::size_t(wp.indices[k])] == 1));
    for (std::size_t k = 1; k < wm.indices.size(); ++k) CHECK((is_bulk(wm.indices[k]) && c.side[std::size_t(wm.indices[k])] == -1));
    // the program only bounds v1 below by 0, so best-gamma rows may sit on it
    for (const auto* w : {&wp, &wm}) {
      const double tiny = 1e-12 * std::abs(w->weights[1]);
      if (w->branch == Branch::QpBestGamma)
        CHECK(w->center() >= -tiny);
      else
        CHECK(w->center() > 0.0);
    }
  }
}

TEST_CASE("exact solution satisfies the jump rows") {
  const auto pb = sphere_equator_problem();
  const auto c = sample_interface_cloud(pb, 1600, 2);
  const auto sys = assemble_interface_system(pb, c, AutotuneConfig{});
  const Eigen::VectorXd r = sys.A * interface_exact(pb, c) - sys.rhs;
  for (Index g = 0; g < c.n_interface; ++g) CHECK(std::abs(r[c.plus_copy(g)]) < 1e-10);
  // jump data against the fields themselves
  const double t = 0.9;
  const ParamPoint p = pb.curve(t);
  CHECK(jump_value(pb, t) == doctest::Approx(field_value(pb.surface, pb.u_plus, p) -
                                              field_value(pb.surface, pb.u_minus, p)));
  // at the equator u+ has normal derivative 4 pi x1 x2 and u- none
  const Vec3 x = embed(pb.surface, p);
  CHECK(jump_flux(pb, t) == doctest::Approx(4 * kPi * x[0] * x[1]).epsilon(1e-8));
}

TEST_CASE("quadratic solution is reproduced through the interface") {
  const auto pb = plane_trivial_problem();
  const Solved s = solve_interface(pb, 1600, 11);
  const Eigen::VectorXd ex = interface_exact(pb, s.cloud);
  CHECK((s.u - ex).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("trivial jumps match the single-domain solve") {
  const auto pb = plane_trivial_problem();
  CHECK(std::abs(jump_value(pb, 1.0)) < 1e-15);
  CHECK(std::abs(jump_flux(pb, 1.0)) < 1e-14);
  for (std::uint64_t seed : {13, 14}) CHECK(oracle::trivial_jump_mismatch(1600, seed) < 1e-8);
}

TEST_CASE("interface nodes are equally spaced in the curve parameter") {
  const auto pb = sphere_equator_problem();
  const auto c = sample_interface_cloud(pb, 1600, 4);
  const double step = pb.period / double(c.n_interface);
  CHECK(c.curve_t[0] >= 0.0);
  CHECK(c.curve_t[0] < step);
  for (Index g = 1; g < c.n_interface; ++g)
    CHECK(c.curve_t[std::size_t(g)] - c.curve_t[std::size_t(g - 1)] == doctest::Approx(step));
}

TEST_CASE("star interface error decreases under refinement") {
  const auto pb = paraboloid_star_problem();
  double prev = 1e300;
  for (Index N : {1600, 3200, 6400}) {
    const Solved s = solve_interface(pb, N, 21);
    const double ie = rms(s.u - interface_exact(pb, s.cloud));
    CHECK(ie < prev);
    prev = ie;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("serial and parallel interface assembly agree") {
  const auto pb = paraboloid_star_problem();
  const auto c = sample_interface_cloud(pb, 1600, 8);
  const auto a = assemble_interface_system(pb, c, AutotuneConfig{}, Execution::Serial);
  const auto b = assemble_interface_system(pb, c, AutotuneConfig{}, Execution::Parallel);
  CHECK((SparseMatrix(a.A - b.A)).norm() == 0.0);
  CHECK(a.rhs == b.rhs);
}
