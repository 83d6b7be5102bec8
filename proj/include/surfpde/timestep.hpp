#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "surfpde/linsys.hpp"

namespace surfpde {

/// (alpha_0, ..., alpha_order) with sum_j alpha_j u^{n-j} = dt F(u^n).
std::vector<double> bdf_coefficients(int order);

/// Implicit BDF integration of u' = nu A u + g(t). One LU of
/// (alpha_0 I - dt nu A) per order in use, reused across steps.
class BdfIntegrator {
 public:
  using Forcing = std::function<Eigen::VectorXd(double)>;

  BdfIntegrator(SparseMatrix A, double nu, double dt, int max_order = 4, bool cache_factors = true);

  /// Seeds the history with the exact initial value at t0.
  void reset(const Eigen::VectorXd& u0, double t0);

  /// Seeds the full history, newest first, the newest value at time t.
  void set_history(const std::vector<Eigen::VectorXd>& newest_first, double t);

  /// Brings the history to max_order entries. With substeps == 1 (or
  /// depth == 0) the first steps use BDF1, BDF2, ... at dt. Otherwise a
  /// nested integrator at dt / substeps, itself started with depth - 1,
  /// produces the values at t0 + dt, t0 + 2 dt, ....
  void startup(const Forcing& g, int substeps = 64, int depth = 2);

  /// One step at order min(history, max_order).
  void advance(const Forcing& g);

  /// Steps until time() reaches t_end (within dt / 2).
  void advance_to(double t_end, const Forcing& g);

  const Eigen::VectorXd& current() const { return history_.front(); }
  double time() const { return t_; }
  double dt() const { return dt_; }
  int history_size() const { return static_cast<int>(history_.size()); }
  int max_order() const { return max_order_; }

 private:
  const SparseLU& factor(int order);

  SparseMatrix A_;
  double nu_, dt_;
  int max_order_;
  bool cache_;
  double t_ = 0.0;
  std::deque<Eigen::VectorXd> history_;  // most recent first
  std::map<int, std::unique_ptr<SparseLU>> factors_;
  std::unique_ptr<SparseLU> scratch_;
};

}  // namespace surfpde
