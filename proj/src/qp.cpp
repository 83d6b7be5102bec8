#include "surfpde/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace surfpde {

double QuadraticProgram::objective(const Eigen::VectorXd& z) const {
  double f = 0.5 * z.dot(H.cwiseProduct(z));
  if (c.size() > 0) f += c.dot(z);
  return f;
}

const char* status_name(QPStatus s) {
  switch (s) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

double KktReport::worst() const {
  return std::max({stationarity, equality, inequality, dual, complementarity});
}

KktReport kkt_report(const QuadraticProgram& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& mu,
                     const Eigen::VectorXd& nu) {
  KktReport rep;
  Eigen::VectorXd grad = qp.H.cwiseProduct(z);
  if (qp.c.size() > 0) grad += qp.c;
  if (qp.E.rows() > 0) grad += qp.E.transpose() * mu;
  if (qp.G.rows() > 0) grad += qp.G.transpose() * nu;
  rep.stationarity = grad.norm() / (1.0 + z.norm());
  if (qp.E.rows() > 0) rep.equality = (qp.E * z - qp.e).cwiseAbs().maxCoeff();
  if (qp.G.rows() > 0) {
    const Eigen::VectorXd slack = qp.G * z - qp.g;
    rep.inequality = std::max(0.0, slack.maxCoeff());
    rep.dual = std::max(0.0, -nu.minCoeff());
    rep.complementarity = nu.cwiseProduct(slack).cwiseAbs().maxCoeff();
  }
  return rep;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDependence = 1e-12;
constexpr double kViolation = 1e-12;

// State of the dual method: J = L^{-T} Q and R such that the first iq
// columns of Q span the active normals (in the L^{-1} metric).
struct DualState {
  Index n;
  Eigen::MatrixXd J;
  Eigen::MatrixXd R;
  double r_norm = 1.0;
  std::vector<Index> active;
  std::vector<double> u;

  Index iq() const { return static_cast<Index>(active.size()); }

  // Rotates d so that only d[0..iq] is nonzero, appends it as a column of R.
  bool add(Eigen::VectorXd& d) {
    const Index q = iq();
    for (Index j = n - 1; j >= q + 1; --j) {
      double cc = d[j - 1], ss = d[j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d[j - 1] = -h;
      } else {
        d[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Index k = 0; k < n; ++k) {
        const double t1 = J(k, j - 1), t2 = J(k, j);
        J(k, j - 1) = t1 * cc + t2 * ss;
        J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
      }
    }
    R.col(q).head(q + 1) = d.head(q + 1);
    if (std::abs(d[q]) <= std::numeric_limits<double>::epsilon() * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d[q]));
    return true;
  }

  // Removes active entry at position pos and restores R to triangular form.
  void remove(Index pos) {
    const Index q = iq();
    active.erase(active.begin() + pos);
    u.erase(u.begin() + pos);
    for (Index i = pos; i < q - 1; ++i) R.col(i) = R.col(i + 1);
    R.col(q - 1).setZero();
    const Index nq = q - 1;
    for (Index j = pos; j < nq; ++j) {
      double cc = R(j, j), ss = R(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Index k = j + 1; k < nq; ++k) {
        const double t1 = R(j, k), t2 = R(j + 1, k);
        R(j, k) = t1 * cc + t2 * ss;
        R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
      }
      for (Index k = 0; k < n; ++k) {
        const double t1 = J(k, j), t2 = J(k, j + 1);
        J(k, j) = t1 * cc + t2 * ss;
        J(k, j + 1) = xny * (J(k, j) + t1) - t2;
      }
    }
  }
};

void validate(const QuadraticProgram& qp) {
  const Index n = qp.n();
  if (n == 0) throw std::invalid_argument("solve_qp: empty program");
  if ((qp.H.array() <= 0.0).any() || !qp.H.allFinite()) throw std::invalid_argument("solve_qp: H must be positive");
  if (qp.c.size() != 0 && qp.c.size() != n) throw std::invalid_argument("solve_qp: c has wrong size");
  if ((qp.E.rows() > 0 && qp.E.cols() != n) || qp.E.rows() != qp.e.size())
    throw std::invalid_argument("solve_qp: equality block has wrong shape");
  if ((qp.G.rows() > 0 && qp.G.cols() != n) || qp.G.rows() != qp.g.size())
    throw std::invalid_argument("solve_qp: inequality block has wrong shape");
}

}  // namespace

QPSolution solve_qp(const QuadraticProgram& qp) {
  validate(qp);
  const Index n = qp.n();
  const Index meq = qp.E.rows();
  const Index mineq = qp.G.rows();

  // constraint k reads  normal(k)^T x >= bound(k), or == for k < meq
  auto normal = [&](Index k) -> Eigen::VectorXd {
    return k < meq ? Eigen::VectorXd(qp.E.row(k).transpose()) : Eigen::VectorXd(-qp.G.row(k - meq).transpose());
  };
  auto bound = [&](Index k) { return k < meq ? qp.e[k] : -qp.g[k - meq]; };

  DualState st;
  st.n = n;
  st.J = qp.H.cwiseSqrt().cwiseInverse().asDiagonal();
  st.R = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (qp.c.size() > 0) x = -qp.c.cwiseQuotient(qp.H);

  Eigen::VectorXd d(n), z(n), r(n);
  // d = J^T np, z = primal step direction, r = dual step direction
  auto directions = [&](const Eigen::VectorXd& np) {
    const Index q = st.iq();
    d = st.J.transpose() * np;
    z = st.J.rightCols(n - q) * d.tail(n - q);
    if (q > 0) r.head(q) = st.R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
    return d.tail(n - q).norm() > kDependence * std::max(1.0, d.norm());
  };

  QPSolution sol;
  auto finish = [&](QPStatus status) {
    sol.status = status;
    sol.z = x;
    sol.eq_multipliers = Eigen::VectorXd::Zero(meq);
    sol.ineq_multipliers = Eigen::VectorXd::Zero(mineq);
    for (Index k = 0; k < st.iq(); ++k) {
      const Index id = st.active[k];
      if (id < meq) {
        sol.eq_multipliers[id] = -st.u[k];
      } else {
        sol.ineq_multipliers[id - meq] = st.u[k];
        sol.active_set.push_back(id - meq);
      }
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.kkt_residual = kkt_report(qp, sol.z, sol.eq_multipliers, sol.ineq_multipliers).worst();
    return sol;
  };

  for (Index k = 0; k < meq; ++k) {
    const Eigen::VectorXd np = normal(k);
    const double resid = bound(k) - np.dot(x);
    if (!directions(np)) {
      // linearly dependent on earlier equalities: redundant or contradictory
      if (std::abs(resid) <= 1e-10 * (1.0 + std::abs(bound(k)) + np.norm() * x.norm())) continue;
      return finish(QPStatus::Infeasible);
    }
    const double t = resid / z.dot(np);
    x += t * z;
    for (Index j = 0; j < st.iq(); ++j) st.u[j] -= t * r[j];
    if (!st.add(d)) return finish(QPStatus::Infeasible);
    st.active.push_back(k);
    st.u.push_back(t);
  }

  std::vector<char> is_active(static_cast<std::size_t>(mineq), 0);
  const int cap = static_cast<int>(50 * n);
  for (;;) {
    // most violated inactive inequality; ties go to the lowest index
    Index p = -1;
    double worst = 0.0;
    const Eigen::VectorXd slack = qp.g - qp.G * x;
    for (Index j = 0; j < mineq; ++j) {
      if (is_active[j]) continue;
      const double tol = kViolation * (1.0 + std::abs(qp.g[j]) + qp.G.row(j).norm() * x.norm());
      const double scaled = slack[j] / tol;
      if (slack[j] < -tol && scaled < worst) {
        worst = scaled;
        p = j;
      }
    }
    if (p < 0) return finish(QPStatus::Optimal);

    const Eigen::VectorXd np = normal(meq + p);
    double sp = np.dot(x) - bound(meq + p);
    double u_plus = 0.0;
    for (;;) {
      if (++sol.iterations > cap) return finish(QPStatus::IterationLimit);
      const bool independent = directions(np);
      const Index q = st.iq();

      double t1 = kInf;
      Index drop = -1;
      for (Index k = 0; k < q; ++k) {
        if (st.active[k] < meq || r[k] <= 0.0) continue;
        const double ratio = st.u[k] / r[k];
        if (ratio < t1) {
          t1 = ratio;
          drop = k;
        }
      }
      const double t2 = independent ? -sp / z.dot(np) : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) return finish(QPStatus::Infeasible);

      if (t2 == kInf) {
        // dual-only step: shed a blocking constraint, keep the primal point
        for (Index k = 0; k < q; ++k) st.u[k] -= t * r[k];
        u_plus += t;
        is_active[st.active[drop] - meq] = 0;
        st.remove(drop);
        continue;
      }

      x += t * z;
      for (Index k = 0; k < q; ++k) st.u[k] -= t * r[k];
      u_plus += t;
      if (t == t2) {
        if (!st.add(d)) return finish(QPStatus::Infeasible);
        st.active.push_back(meq + p);
        st.u.push_back(u_plus);
        is_active[p] = 1;
        break;
      }
      is_active[st.active[drop] - meq] = 0;
      st.remove(drop);
      sp = np.dot(x) - bound(meq + p);
    }
  }
}

QuadraticProgram interior_qp(const LocalSystem& sys, const Eigen::RowVectorXd& rhs) {
  const Index K = sys.K();
  const Index m = sys.m();
  if (rhs.size() != m) throw std::invalid_argument("interior_qp: rhs length must equal m");
  QuadraticProgram qp;
  qp.H.resize(K + 1);
  qp.H.head(K) = sys.lambda.cwiseInverse();
  qp.H[K] = sys.lambda.cwiseInverse().sum();
  qp.E = Eigen::MatrixXd::Zero(m, K + 1);
  qp.E.leftCols(K) = sys.P.transpose();
  qp.e = rhs.transpose();
  qp.G = Eigen::MatrixXd::Zero(K + 1, K + 1);
  qp.g = Eigen::VectorXd::Zero(K + 1);
  qp.G(0, 0) = 1.0;  // w_1 + C <= 0
  qp.G(0, K) = 1.0;
  for (Index k = 1; k < K; ++k) {  // -w_k - C <= 0
    qp.G(k, k) = -1.0;
    qp.G(k, K) = -1.0;
  }
  qp.G(K, K) = -1.0;  // C >= 0
  return qp;
}

QuadraticProgram boundary_qp(const LocalSystem& sys, const Eigen::RowVectorXd& rhs) {
  const Index K = sys.K();
  const Index m = sys.m();
  if (rhs.size() != m) throw std::invalid_argument("boundary_qp: rhs length must equal m");
  QuadraticProgram qp;
  qp.H.resize(K + 1);
  qp.H.head(K) = sys.lambda.cwiseInverse();
  qp.H[K] = sys.lambda.cwiseInverse().sum();
  qp.E = Eigen::MatrixXd::Zero(m, K + 1);
  qp.E.leftCols(K) = sys.P.transpose();
  qp.e = rhs.transpose();
  const Index q = 2 * K;
  qp.G = Eigen::MatrixXd::Zero(q, K + 1);
  qp.g = Eigen::VectorXd::Zero(q);
  qp.G(0, 0) = -1.0;  // v_1 >= 0
  for (Index k = 1; k < K; ++k) {
    qp.G(2 * k - 1, k) = 1.0;  // v_k <= C
    qp.G(2 * k - 1, K) = -1.0;
    qp.G(2 * k, k) = -1.0;  // -v_k <= C
    qp.G(2 * k, K) = -1.0;
  }
  qp.G(q - 1, K) = -1.0;  // C >= 0
  return qp;
}

QuadraticProgram boundary_qp(const LocalSystem& sys, const Frame& frame, const Vec3& n) {
  return boundary_qp(sys, conormal_poly_row(sys.degree, frame, n));
}

}  // namespace surfpde
