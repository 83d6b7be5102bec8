#include "surfpde/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <umfpack.h>

namespace surfpde {

SparseLU::SparseLU(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("LU requires a square matrix");
  n_ = A.rows();
  // double transpose leaves row indices sorted within each column
  const SparseMatrix At = A.transpose();
  SparseMatrix S = At.transpose();
  S.makeCompressed();
  colptr_.assign(S.outerIndexPtr(), S.outerIndexPtr() + n_ + 1);
  rowind_.assign(S.innerIndexPtr(), S.innerIndexPtr() + S.nonZeros());
  values_.assign(S.valuePtr(), S.valuePtr() + S.nonZeros());

  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const int n = static_cast<int>(n_);
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n, n, colptr_.data(), rowind_.data(), values_.data(), &symbolic, control, info);
  if (status != UMFPACK_OK) {
    umfpack_di_free_symbolic(&symbolic);
    throw SolveError("symbolic factorization failed (UMFPACK status " + std::to_string(status) + ")");
  }
  status = umfpack_di_numeric(colptr_.data(), rowind_.data(), values_.data(), symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status != UMFPACK_OK) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SolveError(status == UMFPACK_WARNING_singular_matrix
                         ? std::string("matrix is singular")
                         : "numeric factorization failed (UMFPACK status " + std::to_string(status) + ")");
  }
}

SparseLU::~SparseLU() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

SparseLU::SparseLU(SparseLU&& o) noexcept
    : n_(o.n_),
      colptr_(std::move(o.colptr_)),
      rowind_(std::move(o.rowind_)),
      values_(std::move(o.values_)),
      numeric_(o.numeric_) {
  o.numeric_ = nullptr;
}

SparseLU& SparseLU::operator=(SparseLU&& o) noexcept {
  if (this != &o) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    n_ = o.n_;
    colptr_ = std::move(o.colptr_);
    rowind_ = std::move(o.rowind_);
    values_ = std::move(o.values_);
    numeric_ = o.numeric_;
    o.numeric_ = nullptr;
  }
  return *this;
}

Eigen::VectorXd SparseLU::solve_impl(const Eigen::VectorXd& b, int mode) const {
  if (b.size() != n_) throw std::invalid_argument("right-hand side has the wrong length");
  Eigen::VectorXd x(n_);
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const int status = umfpack_di_solve(mode, colptr_.data(), rowind_.data(), values_.data(), x.data(), b.data(),
                                      numeric_, control, info);
  if (status != UMFPACK_OK) throw SolveError("triangular solve failed (UMFPACK status " + std::to_string(status) + ")");
  return x;
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& b) const { return solve_impl(b, UMFPACK_A); }
Eigen::VectorXd SparseLU::solve_transpose(const Eigen::VectorXd& b) const { return solve_impl(b, UMFPACK_At); }

Eigen::VectorXd SchurSystem::boundary_lift(const Eigen::VectorXd& h_B) const {
  if (h_B.size() != n_boundary()) throw std::invalid_argument("boundary data has the wrong length");
  return L_IB * B_BB_inv.cwiseProduct(h_B);
}

Eigen::VectorXd SchurSystem::reduced_rhs(const Eigen::VectorXd& f_I, const Eigen::VectorXd& h_B) const {
  if (f_I.size() != n_interior()) throw std::invalid_argument("interior data has the wrong length");
  return f_I - boundary_lift(h_B);
}

Eigen::VectorXd SchurSystem::back_substitute(const Eigen::VectorXd& u_I, const Eigen::VectorXd& h_B) const {
  if (u_I.size() != n_interior() || h_B.size() != n_boundary()) throw std::invalid_argument("length mismatch");
  return B_BB_inv.cwiseProduct(h_B - B_BI * u_I);
}

SchurSystem schur_reduce(const SparseMatrix& L, const SparseMatrix& B) {
  const Index nI = L.rows(), nB = B.rows();
  if (L.cols() != nI + nB || B.cols() != nI + nB) throw std::invalid_argument("blocks do not partition the columns");
  SchurSystem sys;
  sys.L_IB = L.rightCols(nB);
  sys.B_BI = B.leftCols(nI);
  const SparseMatrix B_BB = B.rightCols(nB);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(nB);
  for (Index k = 0; k < B_BB.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B_BB, k); it; ++it) {
      if (it.value() == 0.0) continue;
      if (it.row() != it.col())
        throw std::invalid_argument("boundary block has an off-diagonal entry at node " +
                                    std::to_string(nI + it.row()));
      diag[it.row()] = it.value();
    }
  for (Index k = 0; k < nB; ++k)
    if (diag[k] == 0.0) throw SingularityError(nI + k, "zero diagonal entry in the boundary block");
  sys.B_BB_inv = diag.cwiseInverse();
  const SparseMatrix L_II = L.leftCols(nI);
  const SparseMatrix scaled = sys.B_BB_inv.asDiagonal() * sys.B_BI;
  sys.A = L_II - SparseMatrix(sys.L_IB * scaled);
  return sys;
}

SchurSystem schur_reduce(const OperatorMatrix& L, const OperatorMatrix& B) {
  return schur_reduce(L.matrix(), B.matrix());
}

SolveResult solve(const SchurSystem& sys, const SparseLU& lu, const Eigen::VectorXd& f_I,
                  const Eigen::VectorXd& h_B) {
  const Eigen::VectorXd b = sys.reduced_rhs(f_I, h_B);
  SolveResult out;
  out.u_I = lu.solve(b);
  out.residual = (sys.A * out.u_I - b).lpNorm<Eigen::Infinity>();
  out.u_B = sys.back_substitute(out.u_I, h_B);
  return out;
}

SolveResult solve(const SchurSystem& sys, const Eigen::VectorXd& f_I, const Eigen::VectorXd& h_B) {
  const SparseLU lu(sys.A);
  return solve(sys, lu, f_I, h_B);
}

namespace {

Eigen::VectorXd start_vector(Index n, std::uint64_t stream) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform01(0x5eedULL, stream, static_cast<std::uint64_t>(i)) - 0.5;
  return v.normalized();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(const Eigen::MatrixXd& V, Index cols, Eigen::VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
}

}  // namespace

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& A, const SparseLU& lu, int count,
                                           const EigenOptions& opt) {
  using cd = std::complex<double>;
  const Index n = A.rows();
  if (count < 1 || count >= n) throw std::invalid_argument("eigenpair count must lie in [1, n)");
  const Index k = count;
  const Index m = std::min<Index>(n, std::max<Index>(2 * k + 20, 40));
  const Index keep = std::min<Index>(m - 1, k + (m - k) / 2);

  auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -lu.solve(x); };

  Eigen::MatrixXd V(n, m + 1), W(n, m);
  V.col(0) = start_vector(n, 0);
  Index cur = 0;
  std::uint64_t restart_stream = 1;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    for (Index j = cur; j < m; ++j) {
      W.col(j) = op(V.col(j));
      Eigen::VectorXd w = W.col(j);
      orthogonalize(V, j + 1, w);
      double beta = w.norm();
      if (!(beta > 1e-13 * W.col(j).norm())) {
        // invariant subspace found: continue from a fresh direction
        w = start_vector(n, restart_stream++);
        orthogonalize(V, j + 1, w);
        beta = w.norm();
      }
      V.col(j + 1) = w / beta;
    }

    const Eigen::MatrixXd H = V.leftCols(m).transpose() * W;
    Eigen::EigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw EigenError("projected eigenproblem failed");
    const Eigen::VectorXcd mu = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(mu[a]) > std::abs(mu[b]); });

    bool converged = true;
    for (Index i = 0; i < k && converged; ++i) {
      const Index c = order[static_cast<std::size_t>(i)];
      const Eigen::VectorXcd y = Y.col(c);
      const Eigen::VectorXcd r = W.cast<cd>() * y - mu[c] * (V.leftCols(m).cast<cd>() * y);
      converged = r.norm() <= opt.tol * std::abs(mu[c]) * y.norm();
    }

    if (converged) {
      std::vector<EigenPair> out;
      for (Index i = 0; i < k; ++i) {
        const Index c = order[static_cast<std::size_t>(i)];
        Eigen::VectorXcd x = V.leftCols(m).cast<cd>() * Y.col(c);
        Index jmax = 0;
        x.cwiseAbs().maxCoeff(&jmax);
        x *= std::conj(x[jmax]) / std::abs(x[jmax]);
        EigenPair p;
        const cd lambda = 1.0 / mu[c];
        p.value = lambda.real();
        p.imag = lambda.imag();
        p.vector = x.real();
        p.vector.cwiseAbs().maxCoeff(&jmax);
        p.vector /= p.vector[jmax];
        out.push_back(std::move(p));
      }
      std::stable_sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
      return out;
    }

    // thick restart on the leading Ritz vectors, real and imaginary parts
    Eigen::MatrixXd Yr(m, 2 * keep);
    Index cols = 0;
    for (Index i = 0; i < keep; ++i) {
      const Index c = order[static_cast<std::size_t>(i)];
      Yr.col(cols++) = Y.col(c).real();
      if (mu[c].imag() != 0.0) Yr.col(cols++) = Y.col(c).imag();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Yr.leftCols(cols));
    qr.setThreshold(1e-10);
    const Index q = std::min<Index>(qr.rank(), m - 1);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, q);
    const Eigen::VectorXd last = V.col(m);
    V.leftCols(q) = V.leftCols(m) * Q;
    W.leftCols(q) = W * Q;
    V.col(q) = last;
    cur = q;
  }
  throw EigenError("shift-invert Arnoldi did not converge within the restart cap");
}

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& A, int count, const EigenOptions& opt) {
  const SparseLU lu(A);
  return smallest_eigenpairs(A, lu, count, opt);
}

double inv_norm_estimate(const SparseLU& lu, double rel_tol, int max_iter) {
  Eigen::VectorXd x = start_vector(lu.size(), 0);
  double s = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd y = lu.solve(x);
    const double s_new = y.norm();
    const Eigen::VectorXd z = lu.solve_transpose(y);
    x = z / z.norm();
    if (it > 0 && std::abs(s_new - s) <= rel_tol * s_new) return s_new;
    s = s_new;
  }
  return s;
}

double inv_norm_estimate(const SparseMatrix& A, double rel_tol, int max_iter) {
  const SparseLU lu(A);
  return inv_norm_estimate(lu, rel_tol, max_iter);
}

std::vector<bool> near_degenerate(const std::vector<EigenPair>& pairs, double rel) {
  std::vector<bool> flag(pairs.size(), false);
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const double gap = std::abs(pairs[i + 1].value - pairs[i].value);
    if (gap < rel * std::max(std::abs(pairs[i].value), std::abs(pairs[i + 1].value))) flag[i] = flag[i + 1] = true;
  }
  return flag;
}

}  // namespace surfpde
