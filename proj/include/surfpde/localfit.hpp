#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "surfpde/geometry.hpp"
#include "surfpde/stencil.hpp"

namespace surfpde {

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ridge parameter of the weighted pseudoinverse of the PHS matrix.
inline constexpr double kRidgeDelta = 1e-5;

/// Monge coordinates are divided by this multiple of the stencil radius
/// (largest tangent-plane distance from the base) before any matrix is formed.
inline constexpr double kRadiusMultiple = 2.0;

/// Number of bivariate monomials of total degree <= l.
constexpr int monomial_count(int l) { return (l + 2) * (l + 1) / 2; }

/// Graded lexicographic exponents: 1, t1, t2, t1^2, t1 t2, t2^2, ...
std::vector<std::array<int, 2>> monomial_exponents(int l);

/// Per-stencil matrices in normalized Monge coordinates.
struct LocalSystem {
  Eigen::MatrixX2d thetas;  // normalized; row 0 is the base (0, 0)
  Eigen::MatrixXd P;        // K x m Vandermonde
  Eigen::MatrixXd Phi;      // K x K, |theta_i - theta_j|^(2 kappa + 1)
  Eigen::VectorXd lambda;   // 1, 1/K, ..., 1/K
  Eigen::MatrixXd gmls;     // (P^T Lambda P)^{-1} P^T Lambda, m x K
  double scale = 1.0;       // length unit: a multiple of the stencil radius
  int degree = 0;
  int kappa = 0;

  Index K() const { return static_cast<Index>(thetas.rows()); }
  int m() const { return monomial_count(degree); }
};

/// Builds P, Phi, Lambda and the GMLS operator for a stencil around the
/// frame's base point. Throws RankDeficiencyError when rank(P) < m.
LocalSystem build_local_system(std::span<const Vec3> points, const Frame& frame, std::span<const Index> stencil,
                               int degree, int kappa, double radius_multiple = kRadiusMultiple);
LocalSystem build_local_system(const PointCloud& cloud, const Stencil& stencil, int degree, int kappa,
                               double radius_multiple = kRadiusMultiple);

/// Recomputes the GMLS operator from sys.P and sys.lambda.
void factor_gmls(LocalSystem& sys);

inline double phs(double r, int kappa) {
  double v = r;
  for (int i = 0; i < kappa; ++i) v *= r * r;
  return v;
}

/// Laplacian of phi(|theta - theta_k|) at theta = 0, one entry per node.
Eigen::RowVectorXd laplacian_phs_row(const LocalSystem& sys);
/// Gradient of phi(|theta - theta_k|) at theta = 0, one column per node.
Eigen::Matrix2Xd gradient_phs_rows(const LocalSystem& sys);
/// Laplacian of each monomial at the origin: 2 at t1^2 and t2^2.
Eigen::RowVectorXd laplacian_poly_row(int degree);
/// Gradient of each monomial at the origin: unit entries at t1 and t2.
Eigen::Matrix2Xd gradient_poly_rows(int degree);

/// (Phi^T Lambda Phi + delta^2 I)^{-1} Phi^T Lambda.
Eigen::MatrixXd phi_pinv(const LocalSystem& sys, double delta = kRidgeDelta);

/// Two-step weights in normalized coordinates for an operator with the
/// given PHS row and polynomial row: r Phi^+ (I - P G) + p G.
Eigen::RowVectorXd two_step_weights(const LocalSystem& sys, const Eigen::RowVectorXd& phs_row,
                                    const Eigen::RowVectorXd& poly_row, double delta = kRidgeDelta);

enum class RowKind { Laplacian, Conormal };
enum class Branch { RbfFd, Qp, QpBestGamma };

const char* branch_name(Branch b);

/// Sparse operator row with the diagnostics of how it was produced.
struct WeightRow {
  std::vector<Index> indices;
  std::vector<double> weights;
  RowKind kind = RowKind::Laplacian;
  Branch branch = Branch::RbfFd;
  Index K = 0;
  double gamma = 0.0;

  double center() const { return weights.front(); }
  double apply(std::span<const double> u) const;
};

/// |w_1| / max_{k>=2} |w_k|.
double dominance_ratio(std::span<const double> w);

/// Laplace-Beltrami weights for the stencil, in ambient units.
WeightRow laplacian_row(const LocalSystem& sys, std::span<const Index> ids, double delta = kRidgeDelta);

/// Co-normal derivative weights; n must lie in the frame's tangent plane.
WeightRow conormal_row(const LocalSystem& sys, std::span<const Index> ids, const Frame& frame, const Vec3& n,
                       double delta = kRidgeDelta);

/// (n.t1, n.t2) times the polynomial gradient rows.
Eigen::RowVectorXd conormal_poly_row(int degree, const Frame& frame, const Vec3& n);

}  // namespace surfpde
