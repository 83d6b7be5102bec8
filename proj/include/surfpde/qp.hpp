#pragma once

#include <vector>

#include <Eigen/Dense>

#include "surfpde/localfit.hpp"

namespace surfpde {

/// minimize 1/2 z^T diag(H) z + c^T z  subject to  E z = e,  G z <= g.
struct QuadraticProgram {
  Eigen::VectorXd H;
  Eigen::VectorXd c;  // empty means zero
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;

  Index n() const { return H.size(); }
  double objective(const Eigen::VectorXd& z) const;
};

enum class QPStatus { Optimal, Infeasible, IterationLimit };

const char* status_name(QPStatus s);

/// Multipliers follow  H z + c + E^T mu + G^T nu = 0  with nu >= 0.
struct QPSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
  std::vector<Index> active_set;  // inequality rows active at z
  double kkt_residual = 0.0;
  QPStatus status = QPStatus::Infeasible;
  int iterations = 0;
};

/// Scaled KKT violations of a candidate (z, mu, nu).
struct KktReport {
  double stationarity = 0.0;      // |Hz + c + E^T mu + G^T nu| / (1 + |z|)
  double equality = 0.0;          // max |Ez - e|
  double inequality = 0.0;        // max (Gz - g)_+
  double dual = 0.0;              // max (-nu)_+
  double complementarity = 0.0;   // max |nu_i (Gz - g)_i|

  double worst() const;
};

KktReport kkt_report(const QuadraticProgram& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& mu,
                     const Eigen::VectorXd& nu);

/// Dual active-set method of Goldfarb and Idnani specialised to a diagonal
/// Hessian. Starts from the unconstrained minimizer, so no feasible initial
/// point is needed. Deterministic; at most 50 n active-set changes.
QPSolution solve_qp(const QuadraticProgram& qp);

/// Interior stabilization program over z = (w_1..w_K, C) in normalized
/// coordinates: objective sum_k (w_k^2 + C^2) / (2 lambda_k), P^T w = rhs,
/// w_1 <= -C, w_k >= -C for k >= 2, C >= 0.
QuadraticProgram interior_qp(const LocalSystem& sys, const Eigen::RowVectorXd& rhs);

/// Boundary program over z = (v_1..v_K, C): same objective, P^T v = rhs,
/// v_1 >= 0, |v_k| <= C for k >= 2, C >= 0.
QuadraticProgram boundary_qp(const LocalSystem& sys, const Eigen::RowVectorXd& rhs);
QuadraticProgram boundary_qp(const LocalSystem& sys, const Frame& frame, const Vec3& n);

}  // namespace surfpde
