#include "surfpde/timestep.hpp"

#include <stdexcept>

namespace surfpde {

std::vector<double> bdf_coefficients(int order) {
  if (order < 1 || order > 6) throw std::invalid_argument("BDF order must lie in 1..6");
  // derivative at 0 of the Lagrange basis on the nodes 0, -1, ..., -order
  std::vector<double> alpha(static_cast<std::size_t>(order + 1), 0.0);
  for (int j = 0; j <= order; ++j) {
    double denom = 1.0;
    for (int i = 0; i <= order; ++i)
      if (i != j) denom *= double(i - j);
    double num = 0.0;
    for (int k = 0; k <= order; ++k) {
      if (k == j) continue;
      double prod = 1.0;
      for (int i = 0; i <= order; ++i)
        if (i != j && i != k) prod *= double(i);
      num += prod;
    }
    alpha[static_cast<std::size_t>(j)] = num / denom;
  }
  return alpha;
}

BdfIntegrator::BdfIntegrator(SparseMatrix A, double nu, double dt, int max_order, bool cache_factors)
    : A_(std::move(A)), nu_(nu), dt_(dt), max_order_(max_order), cache_(cache_factors) {
  if (A_.rows() != A_.cols()) throw std::invalid_argument("BDF operator must be square");
  if (!(dt_ > 0.0)) throw std::invalid_argument("time step must be positive");
  if (max_order_ < 1 || max_order_ > 6) throw std::invalid_argument("BDF order must lie in 1..6");
}

void BdfIntegrator::reset(const Eigen::VectorXd& u0, double t0) {
  if (u0.size() != A_.rows()) throw std::invalid_argument("initial value has the wrong length");
  history_.clear();
  history_.push_front(u0);
  t_ = t0;
}

void BdfIntegrator::set_history(const std::vector<Eigen::VectorXd>& newest_first, double t) {
  if (newest_first.empty() || static_cast<int>(newest_first.size()) > max_order_)
    throw std::invalid_argument("history must hold 1..max_order values");
  history_.clear();
  for (const auto& u : newest_first) {
    if (u.size() != A_.rows()) throw std::invalid_argument("history value has the wrong length");
    history_.push_back(u);
  }
  t_ = t;
}

const SparseLU& BdfIntegrator::factor(int order) {
  auto build = [&] {
    const double a0 = bdf_coefficients(order)[0];
    SparseMatrix I(A_.rows(), A_.cols());
    I.setIdentity();
    return std::make_unique<SparseLU>(SparseMatrix(a0 * I - (dt_ * nu_) * A_));
  };
  if (!cache_) {
    scratch_ = build();
    return *scratch_;
  }
  auto& slot = factors_[order];
  if (!slot) slot = build();
  return *slot;
}

void BdfIntegrator::advance(const Forcing& g) {
  if (history_.empty()) throw std::logic_error("advance called before reset");
  const int order = std::min(history_size(), max_order_);
  const auto alpha = bdf_coefficients(order);
  const double t_next = t_ + dt_;
  Eigen::VectorXd rhs = dt_ * g(t_next);
  for (int j = 1; j <= order; ++j) rhs -= alpha[static_cast<std::size_t>(j)] * history_[static_cast<std::size_t>(j - 1)];
  Eigen::VectorXd u = factor(order).solve(rhs);
  history_.push_front(std::move(u));
  while (history_size() > max_order_) history_.pop_back();
  t_ = t_next;
}

void BdfIntegrator::startup(const Forcing& g, int substeps, int depth) {
  if (history_size() != 1) throw std::logic_error("startup expects a freshly reset history");
  if (substeps < 1 || depth < 0) throw std::invalid_argument("substeps and depth must be positive");
  if (substeps == 1 || depth == 0) {
    while (history_size() < max_order_) advance(g);
    return;
  }
  if (substeps < max_order_) throw std::invalid_argument("nested startup needs at least max_order substeps");
  BdfIntegrator fine(A_, nu_, dt_ / substeps, max_order_, cache_);
  fine.reset(current(), t_);
  fine.startup(g, substeps, depth - 1);
  const double t0 = t_;
  for (int k = max_order_; k <= (max_order_ - 1) * substeps; ++k) {
    fine.advance(g);
    if (k % substeps == 0) {
      history_.push_front(fine.current());
      t_ = t0 + (k / substeps) * dt_;
    }
  }
}

void BdfIntegrator::advance_to(double t_end, const Forcing& g) {
  while (t_ < t_end - 0.5 * dt_) advance(g);
}

}  // namespace surfpde
