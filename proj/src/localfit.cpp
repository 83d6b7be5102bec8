#include "surfpde/localfit.hpp"

#include <cmath>

namespace surfpde {

namespace {
double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}
}  // namespace

std::vector<std::array<int, 2>> monomial_exponents(int l) {
  std::vector<std::array<int, 2>> out;
  out.reserve(static_cast<std::size_t>(monomial_count(l)));
  for (int d = 0; d <= l; ++d)
    for (int a = d; a >= 0; --a) out.push_back({a, d - a});
  return out;
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::RbfFd: return "rbf-fd";
    case Branch::Qp: return "qp";
    case Branch::QpBestGamma: return "qp-best-gamma";
  }
  return "?";
}

void factor_gmls(LocalSystem& sys) {
  const Eigen::VectorXd sqrt_lambda = sys.lambda.cwiseSqrt();
  const Eigen::MatrixXd weighted = sqrt_lambda.asDiagonal() * sys.P;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
  qr.setThreshold(1e-10);
  if (qr.rank() < sys.P.cols())
    throw RankDeficiencyError("rank(P) = " + std::to_string(qr.rank()) + " < m = " + std::to_string(sys.P.cols()));
  const Eigen::MatrixXd d = sqrt_lambda.asDiagonal();
  sys.gmls = qr.solve(d);
}

LocalSystem build_local_system(std::span<const Vec3> points, const Frame& frame, std::span<const Index> stencil,
                               int degree, int kappa, double radius_multiple) {
  const auto K = static_cast<Index>(stencil.size());
  const int m = monomial_count(degree);
  if (kappa < 1) throw std::invalid_argument("PHS exponent must be at least 1");
  if (degree < 1) throw std::invalid_argument("polynomial degree must be at least 1");
  if (!(radius_multiple > 0.0)) throw std::invalid_argument("radius multiple must be positive");
  if (K <= m) throw RankDeficiencyError("stencil size K=" + std::to_string(K) + " must exceed m=" + std::to_string(m));

  LocalSystem sys;
  sys.degree = degree;
  sys.kappa = kappa;
  sys.thetas.resize(K, 2);
  for (Index k = 0; k < K; ++k)
    sys.thetas.row(k) = monge_coords(frame, points[static_cast<std::size_t>(stencil[k])]).transpose();

  // length unit from the farthest node; with multiple 2 the stencil fits a unit-diameter disk
  double radius = 0.0;
  for (Index k = 0; k < K; ++k) radius = std::max(radius, sys.thetas.row(k).norm());
  if (!(radius > 0.0)) throw NumericalError("degenerate stencil: all nodes project onto the base");
  sys.scale = radius_multiple * radius;
  sys.thetas /= sys.scale;
  sys.Phi.resize(K, K);
  for (Index i = 0; i < K; ++i) {
    sys.Phi(i, i) = 0.0;
    for (Index j = i + 1; j < K; ++j) {
      const double v = phs((sys.thetas.row(i) - sys.thetas.row(j)).norm(), kappa);
      sys.Phi(i, j) = v;
      sys.Phi(j, i) = v;
    }
  }

  const auto exps = monomial_exponents(degree);
  sys.P.resize(K, m);
  for (Index k = 0; k < K; ++k) {
    const double t1 = sys.thetas(k, 0), t2 = sys.thetas(k, 1);
    for (int j = 0; j < m; ++j) sys.P(k, j) = ipow(t1, exps[j][0]) * ipow(t2, exps[j][1]);
  }

  sys.lambda = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  sys.lambda[0] = 1.0;
  factor_gmls(sys);
  return sys;
}

LocalSystem build_local_system(const PointCloud& cloud, const Stencil& stencil, int degree, int kappa,
                               double radius_multiple) {
  return build_local_system(cloud.ambient, cloud.frames[static_cast<std::size_t>(stencil.base)], stencil.neighbors,
                            degree, kappa, radius_multiple);
}

Eigen::RowVectorXd laplacian_phs_row(const LocalSystem& sys) {
  const double c = (2.0 * sys.kappa + 1.0) * (2.0 * sys.kappa + 1.0);
  Eigen::RowVectorXd row(sys.K());
  for (Index k = 0; k < sys.K(); ++k) row[k] = c * ipow(sys.thetas.row(k).norm(), 2 * sys.kappa - 1);
  return row;
}

Eigen::Matrix2Xd gradient_phs_rows(const LocalSystem& sys) {
  const double c = 2.0 * sys.kappa + 1.0;
  Eigen::Matrix2Xd rows(2, sys.K());
  for (Index k = 0; k < sys.K(); ++k)
    rows.col(k) = -c * ipow(sys.thetas.row(k).norm(), 2 * sys.kappa - 1) * sys.thetas.row(k).transpose();
  return rows;
}

Eigen::RowVectorXd laplacian_poly_row(int degree) {
  const auto exps = monomial_exponents(degree);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Index>(exps.size()));
  for (std::size_t j = 0; j < exps.size(); ++j)
    if ((exps[j][0] == 2 && exps[j][1] == 0) || (exps[j][0] == 0 && exps[j][1] == 2)) row[static_cast<Index>(j)] = 2.0;
  return row;
}

Eigen::Matrix2Xd gradient_poly_rows(int degree) {
  const auto exps = monomial_exponents(degree);
  Eigen::Matrix2Xd rows = Eigen::Matrix2Xd::Zero(2, static_cast<Index>(exps.size()));
  for (std::size_t j = 0; j < exps.size(); ++j) {
    if (exps[j][0] == 1 && exps[j][1] == 0) rows(0, static_cast<Index>(j)) = 1.0;
    if (exps[j][0] == 0 && exps[j][1] == 1) rows(1, static_cast<Index>(j)) = 1.0;
  }
  return rows;
}

namespace {
Eigen::LLT<Eigen::MatrixXd> ridge_factor(const LocalSystem& sys, double delta) {
  Eigen::MatrixXd normal = sys.Phi.transpose() * sys.lambda.asDiagonal() * sys.Phi;
  normal.diagonal().array() += delta * delta;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) throw NumericalError("ridge system is not positive definite");
  return llt;
}
}  // namespace

Eigen::MatrixXd phi_pinv(const LocalSystem& sys, double delta) {
  const auto llt = ridge_factor(sys, delta);
  const Eigen::MatrixXd rhs = sys.Phi.transpose() * sys.lambda.asDiagonal();
  return llt.solve(rhs);
}

Eigen::RowVectorXd two_step_weights(const LocalSystem& sys, const Eigen::RowVectorXd& phs_row,
                                    const Eigen::RowVectorXd& poly_row, double delta) {
  const auto llt = ridge_factor(sys, delta);
  const Eigen::VectorXd y = llt.solve(phs_row.transpose());
  // (r Phi^+)^T = Lambda Phi (Phi^T Lambda Phi + delta^2 I)^{-1} r^T
  const Eigen::RowVectorXd r = (sys.lambda.asDiagonal() * (sys.Phi * y)).transpose();
  const Eigen::RowVectorXd rp = r * sys.P;
  return r - rp * sys.gmls + poly_row * sys.gmls;
}

double dominance_ratio(std::span<const double> w) {
  double off = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) off = std::max(off, std::abs(w[k]));
  if (off == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(w[0]) / off;
}

double WeightRow::apply(std::span<const double> u) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) acc += weights[k] * u[static_cast<std::size_t>(indices[k])];
  return acc;
}

namespace {
WeightRow make_row(std::span<const Index> ids, const Eigen::RowVectorXd& w, RowKind kind) {
  WeightRow row;
  row.indices.assign(ids.begin(), ids.end());
  row.weights.assign(w.data(), w.data() + w.size());
  row.kind = kind;
  row.K = static_cast<Index>(ids.size());
  row.gamma = dominance_ratio(row.weights);
  return row;
}
}  // namespace

WeightRow laplacian_row(const LocalSystem& sys, std::span<const Index> ids, double delta) {
  const Eigen::RowVectorXd w =
      two_step_weights(sys, laplacian_phs_row(sys), laplacian_poly_row(sys.degree), delta) / (sys.scale * sys.scale);
  return make_row(ids, w, RowKind::Laplacian);
}

Eigen::RowVectorXd conormal_poly_row(int degree, const Frame& frame, const Vec3& n) {
  const Eigen::RowVector2d c(n.dot(frame.t1), n.dot(frame.t2));
  return c * gradient_poly_rows(degree);
}

WeightRow conormal_row(const LocalSystem& sys, std::span<const Index> ids, const Frame& frame, const Vec3& n,
                       double delta) {
  const Eigen::RowVector2d c(n.dot(frame.t1), n.dot(frame.t2));
  const Eigen::RowVectorXd w =
      two_step_weights(sys, c * gradient_phs_rows(sys), conormal_poly_row(sys.degree, frame, n), delta) / sys.scale;
  return make_row(ids, w, RowKind::Conormal);
}

}  // namespace surfpde
