#include "surfpde/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

namespace surfpde {

Index AutotuneConfig::initial_K(int degree) const {
  if (K0 > 0) return K0;
  return std::max<Index>(2 * monomial_count(degree), 20);
}

void AutotuneConfig::validate() const {
  if (l < 1 || l_bd < 1) throw std::invalid_argument("polynomial degrees must be positive");
  if (kappa < 1 || kappa > l) throw std::invalid_argument("PHS exponent must satisfy 1 <= kappa <= l");
  for (int d : {l, l_bd})
    if (initial_K(d) <= monomial_count(d)) throw std::invalid_argument("initial K must exceed m");
  if (K_step < 1) throw std::invalid_argument("K step must be positive");
  if (K_max < std::max(initial_K(l), initial_K(l_bd))) throw std::invalid_argument("K_max below initial K");
  if (!(gamma_threshold > 0.0)) throw std::invalid_argument("gamma threshold must be positive");
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in (0, 1]");
  if (!(delta > 0.0)) throw std::invalid_argument("ridge delta must be positive");
  if (!(radius_multiple > 0.0)) throw std::invalid_argument("radius multiple must be positive");
}

namespace {

enum class Target { Interior, Boundary };

bool center_ok(Target t, double w1) { return t == Target::Interior ? w1 < 0.0 : w1 > 0.0; }

// Running choice among rejected rows: largest gamma, first found on ties,
// rows with the right center sign ahead of the rest.
struct BestRow {
  std::optional<WeightRow> row;
  bool sign_ok = false;

  void offer(WeightRow&& r, bool ok) {
    if (row && (sign_ok && !ok)) return;
    if (row && sign_ok == ok && !(r.gamma > row->gamma)) return;
    row = std::move(r);
    sign_ok = ok;
  }
};

WeightRow autotune(Target target, std::span<const Vec3> points, const Frame& frame, const Vec3* conormal,
                   std::span<const Index> candidates, const AutotuneConfig& cfg) {
  const int degree = target == Target::Interior ? cfg.l : cfg.l_bd;
  const Index K0 = cfg.initial_K(degree);
  const Index Kmax = std::min<Index>(cfg.K_max, static_cast<Index>(candidates.size()));
  const Index base = candidates.front();
  if (K0 > Kmax) throw AssemblyError(base, "fewer candidates than the initial stencil size");

  std::vector<std::optional<LocalSystem>> systems;
  std::vector<Index> sizes;
  for (Index K = K0; K <= Kmax; K += cfg.K_step) sizes.push_back(K);
  systems.resize(sizes.size());

  auto ids = [&](Index K) { return candidates.first(static_cast<std::size_t>(K)); };
  BestRow fallback;
  bool any_system = false;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    try {
      systems[s] = build_local_system(points, frame, ids(sizes[s]), degree, cfg.kappa, cfg.radius_multiple);
    } catch (const RankDeficiencyError&) {
      continue;
    }
    any_system = true;
    WeightRow row = target == Target::Interior
                        ? laplacian_row(*systems[s], ids(sizes[s]), cfg.delta)
                        : conormal_row(*systems[s], ids(sizes[s]), frame, *conormal, cfg.delta);
    const bool ok = center_ok(target, row.center());
    if (ok && row.gamma >= cfg.gamma_threshold) return row;
    if (!cfg.use_qp) fallback.offer(std::move(row), ok);
  }
  if (!any_system) throw AssemblyError(base, "polynomial basis is rank deficient at every stencil size");
  if (!cfg.use_qp) return std::move(*fallback.row);

  BestRow best;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (!systems[s]) continue;
    const LocalSystem& sys = *systems[s];
    const QPSolution sol = target == Target::Interior
                               ? solve_qp(interior_qp(sys, laplacian_poly_row(degree)))
                               : solve_qp(boundary_qp(sys, frame, *conormal));
    if (sol.status != QPStatus::Optimal) continue;
    const double unscale = target == Target::Interior ? 1.0 / (sys.scale * sys.scale) : 1.0 / sys.scale;
    WeightRow row;
    const auto stencil = ids(sizes[s]);
    row.indices.assign(stencil.begin(), stencil.end());
    row.weights.resize(stencil.size());
    for (std::size_t k = 0; k < stencil.size(); ++k) row.weights[k] = sol.z[static_cast<Index>(k)] * unscale;
    row.kind = target == Target::Interior ? RowKind::Laplacian : RowKind::Conormal;
    row.K = sizes[s];
    row.gamma = dominance_ratio(row.weights);
    if (row.gamma >= cfg.gamma_threshold) {
      row.branch = Branch::Qp;
      return row;
    }
    row.branch = Branch::QpBestGamma;
    best.offer(std::move(row), true);
  }
  if (!best.row) throw AssemblyError(base, "stabilization program infeasible at every stencil size");
  return std::move(*best.row);
}

std::vector<Index> ordered_ids(Index begin, Index end) {
  std::vector<Index> ids(static_cast<std::size_t>(end - begin));
  std::iota(ids.begin(), ids.end(), begin);
  return ids;
}

}  // namespace

WeightRow interior_row_from_candidates(std::span<const Vec3> points, const Frame& frame,
                                       std::span<const Index> candidates, const AutotuneConfig& cfg) {
  return autotune(Target::Interior, points, frame, nullptr, candidates, cfg);
}

WeightRow boundary_row_from_candidates(std::span<const Vec3> points, const Frame& frame, const Vec3& conormal,
                                       std::span<const Index> candidates, const AutotuneConfig& cfg) {
  return autotune(Target::Boundary, points, frame, &conormal, candidates, cfg);
}

WeightRow interior_row_autotune(const PointCloud& cloud, const SpatialIndex& index, Index i,
                                const AutotuneConfig& cfg) {
  if (cloud.is_boundary(i)) throw AssemblyError(i, "interior row requested for a boundary node");
  const Index K = std::min(cfg.K_max, index.size());
  const Stencil cand = knn(index, cloud.ambient, i, K);
  return interior_row_from_candidates(cloud.ambient, cloud.frames[static_cast<std::size_t>(i)], cand.neighbors, cfg);
}

WeightRow boundary_row_autotune(const PointCloud& cloud, const SpatialIndex& interior_index, Index b,
                                const AutotuneConfig& cfg) {
  if (!cloud.is_boundary(b) || !cloud.conormals[static_cast<std::size_t>(b)])
    throw AssemblyError(b, "boundary row requested for a node without co-normal");
  const Vec3& n = *cloud.conormals[static_cast<std::size_t>(b)];
  const Index K = std::min(cfg.K_max, interior_index.size() + 1);
  const Stencil cand = restricted_knn(interior_index, cloud.ambient, b, n, K, cfg.omega);
  return boundary_row_from_candidates(cloud.ambient, cloud.frames[static_cast<std::size_t>(b)], n, cand.neighbors,
                                      cfg);
}

Eigen::SparseMatrix<double> OperatorMatrix::matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.indices.size();
  trips.reserve(nnz);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].indices.size(); ++k)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(rows[i].indices[k]), rows[i].weights[k]);
  Eigen::SparseMatrix<double> m(static_cast<Index>(rows.size()), cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

OperatorMatrix assemble_interior(const PointCloud& cloud, const AutotuneConfig& cfg, Execution exec) {
  cfg.validate();
  OperatorMatrix op;
  op.cols = cloud.size();
  op.nodes = ordered_ids(0, cloud.n_interior);
  op.rows.resize(op.nodes.size());
  const SpatialIndex index(cloud.ambient);
  for_each_node(cloud.n_interior, exec, [&](Index i) { op.rows[i] = interior_row_autotune(cloud, index, i, cfg); });
  op.center_before_identity.resize(op.rows.size());
  for (std::size_t i = 0; i < op.rows.size(); ++i) op.center_before_identity[i] = op.rows[i].center();
  return op;
}

OperatorMatrix assemble_boundary(const PointCloud& cloud, const AutotuneConfig& cfg, bool robin, Execution exec) {
  cfg.validate();
  OperatorMatrix op;
  op.cols = cloud.size();
  op.nodes = ordered_ids(cloud.n_interior, cloud.size());
  op.rows.resize(op.nodes.size());
  const SpatialIndex interior_index(cloud.ambient, ordered_ids(0, cloud.n_interior));
  for_each_node(cloud.n_boundary, exec, [&](Index k) {
    op.rows[k] = boundary_row_autotune(cloud, interior_index, cloud.n_interior + k, cfg);
  });
  op.center_before_identity.resize(op.rows.size());
  for (std::size_t k = 0; k < op.rows.size(); ++k) {
    op.center_before_identity[k] = op.rows[k].center();
    if (robin) op.rows[k].weights.front() += 1.0;
  }
  return op;
}

double reproduction_error(std::span<const Vec3> points, const Frame& frame, const Vec3* conormal, const WeightRow& row,
                          int degree, double center_offset, double radius_multiple) {
  std::vector<Vec2> th;
  double radius = 0.0;
  for (Index id : row.indices) {
    th.push_back(monge_coords(frame, points[static_cast<std::size_t>(id)]));
    radius = std::max(radius, th.back().norm());
  }
  const double s = radius_multiple * radius;
  const bool lap = row.kind == RowKind::Laplacian;
  const Vec2 n2 = conormal ? Vec2(conormal->dot(frame.t1), conormal->dot(frame.t2)) : Vec2::Zero();
  const double unit = lap ? s * s : s;
  double worst = 0.0;
  for (const auto& e : monomial_exponents(degree)) {
    double acc = 0.0;
    for (std::size_t k = 0; k < th.size(); ++k) {
      const double w = row.weights[k] - (k == 0 ? center_offset : 0.0);
      acc += w * unit * std::pow(th[k][0] / s, e[0]) * std::pow(th[k][1] / s, e[1]);
    }
    double exact = 0.0;
    if (lap && e[0] + e[1] == 2 && e[0] != 1) exact = 2.0;
    if (!lap && e[0] + e[1] == 1) exact = e[0] == 1 ? n2[0] : n2[1];
    worst = std::max(worst, std::abs(acc - exact));
  }
  return worst;
}

void write_diagnostics(std::ostream& os, const OperatorMatrix& op) {
  os << "index branch K gamma w1\n";
  os.precision(10);
  for (std::size_t i = 0; i < op.rows.size(); ++i)
    os << op.nodes[i] << ' ' << branch_name(op.rows[i].branch) << ' ' << op.rows[i].K << ' ' << op.rows[i].gamma
       << ' ' << op.center_before_identity[i] << '\n';
}

}  // namespace surfpde
