#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "surfpde/operators.hpp"

namespace surfpde {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SingularityError : std::runtime_error {
  SingularityError(Index node, const std::string& what)
      : std::runtime_error("node " + std::to_string(node) + ": " + what), node(node) {}
  Index node;
};

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// UMFPACK LU factors of a square sparse matrix (AMD-type ordering chosen by
/// UMFPACK). Solves with A or A^T.
class SparseLU {
 public:
  explicit SparseLU(const SparseMatrix& A);
  ~SparseLU();
  SparseLU(SparseLU&&) noexcept;
  SparseLU& operator=(SparseLU&&) noexcept;
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  Index size() const { return n_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;

 private:
  Eigen::VectorXd solve_impl(const Eigen::VectorXd& b, int mode) const;

  Index n_ = 0;
  std::vector<int> colptr_, rowind_;
  std::vector<double> values_;
  void* numeric_ = nullptr;
};

/// Interior system after eliminating boundary unknowns through the diagonal
/// boundary-boundary block: A' = L_II - L_IB B_BB^-1 B_BI.
struct SchurSystem {
  SparseMatrix A;     // N_I x N_I
  SparseMatrix L_IB;  // N_I x N_B
  SparseMatrix B_BI;  // N_B x N_I
  Eigen::VectorXd B_BB_inv;

  Index n_interior() const { return A.rows(); }
  Index n_boundary() const { return B_BB_inv.size(); }

  /// b' = f_I - L_IB B_BB^-1 h_B
  Eigen::VectorXd reduced_rhs(const Eigen::VectorXd& f_I, const Eigen::VectorXd& h_B) const;
  /// u_B = B_BB^-1 (h_B - B_BI u_I)
  Eigen::VectorXd back_substitute(const Eigen::VectorXd& u_I, const Eigen::VectorXd& h_B) const;
  /// L_IB B_BB^-1 h_B, the boundary contribution moved to the right-hand side.
  Eigen::VectorXd boundary_lift(const Eigen::VectorXd& h_B) const;
};

/// L is N_I x N, B is N_B x N with columns ordered interior first. Throws
/// SingularityError for a zero B_BB diagonal entry and std::invalid_argument
/// for an off-diagonal boundary-boundary entry.
SchurSystem schur_reduce(const SparseMatrix& L, const SparseMatrix& B);
SchurSystem schur_reduce(const OperatorMatrix& L, const OperatorMatrix& B);

struct SolveResult {
  Eigen::VectorXd u_I;
  Eigen::VectorXd u_B;
  double residual = 0.0;  // |A' u_I - b'|_inf
};

SolveResult solve(const SchurSystem& sys, const Eigen::VectorXd& f_I, const Eigen::VectorXd& h_B);
SolveResult solve(const SchurSystem& sys, const SparseLU& lu, const Eigen::VectorXd& f_I,
                  const Eigen::VectorXd& h_B);

struct EigenPair {
  double value = 0.0;
  double imag = 0.0;  // nonzero only for a numerically complex pair
  Eigen::VectorXd vector;
};

struct EigenOptions {
  double tol = 1e-11;  // Ritz residual relative to the shift-inverted eigenvalue
  int max_restarts = 500;
};

/// `count` eigenvalues of -A nearest zero, ascending, by thick-restart
/// Arnoldi on (-A)^-1. Vectors scaled to max-abs 1, first extremal entry
/// positive.
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& A, int count, const EigenOptions& opt = {});
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& A, const SparseLU& lu, int count,
                                           const EigenOptions& opt = {});

/// ||A^-1||_2 by power iteration on A^-T A^-1.
double inv_norm_estimate(const SparseLU& lu, double rel_tol = 1e-3, int max_iter = 500);
double inv_norm_estimate(const SparseMatrix& A, double rel_tol = 1e-3, int max_iter = 500);

/// True for pairs whose gap to a neighbor is below rel * value.
std::vector<bool> near_degenerate(const std::vector<EigenPair>& pairs, double rel = 1e-6);

}  // namespace surfpde
