// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--trials T] [--only 1,4,9] [--strict] [--report FILE]
//
// The exit status is 0 once every selected criterion has been evaluated;
// --strict also turns any FAIL into exit status 1.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "surfpde/harness.hpp"
#include "surfpde/qp.hpp"
#include "surfpde/stencil.hpp"
#include "trivial_jump.hpp"

using namespace surfpde;

namespace {

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;
int trials_override = 0;
std::FILE* report = nullptr;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : "/") + fmt(x);
  return s;
}

void record(int id, bool pass, const std::string& detail) {
  verdicts.push_back({id, pass, detail});
  for (std::FILE* f : {stdout, report}) {
    if (!f) continue;
    std::fprintf(f, "CRITERION %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(f);
  }
}

ExperimentConfig make(Experiment e, const std::string& surface, std::vector<Index> N = {1600, 3200, 6400, 12800}) {
  ExperimentConfig c;
  c.experiment = e;
  c.surface = surface;
  c.N = std::move(N);
  if (trials_override > 0) c.trials = trials_override;
  return c;
}

ExperimentReport run(ExperimentConfig c, double* secs = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r = run_experiment(c);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs) *secs = s;
  std::printf("  ran %s on %s, l=%d l_bd=%d, %d trials, %zu sizes: %.0f s, %d failed trials\n",
              experiment_name(c.experiment), r.surface.c_str(), c.autotune.l, c.autotune.l_bd, c.trials, c.N.size(), s,
              r.failures());
  std::fflush(stdout);
  return r;
}

const MetricSummary& metric(const ExperimentReport& r, const std::string& name) {
  static const MetricSummary empty;
  const auto it = r.summary.find(name);
  return it == r.summary.end() ? empty : it->second;
}

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 4) return false;  // three doublings
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double max_over_trials(const ExperimentReport& r, const std::string& name) {
  double m = 0.0;
  for (const auto& t : r.trials) {
    const double v = t.get(name);
    if (std::isnan(v)) return kNaN;
    m = std::max(m, v);
  }
  return m;
}

// Results shared between criteria.
struct Runs {
  ExperimentReport c32, c43, c44, p32, p44;
  double secs_consistency = 0.0;
  bool have_consistency = false, have_poisson = false;
};

void consistency_runs(Runs& R) {
  if (R.have_consistency) return;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  auto c = make(Experiment::Consistency, "semi-torus");
  c.autotune.l = 3, c.autotune.l_bd = 2;
  R.c32 = run(c, &s1);
  c.autotune.l = 4, c.autotune.l_bd = 4;
  R.c44 = run(c, &s2);
  c.autotune.l = 4, c.autotune.l_bd = 3;
  R.c43 = run(c, &s3);
  R.secs_consistency = s1 + s2;
  R.have_consistency = true;
}

void poisson_runs(Runs& R) {
  if (R.have_poisson) return;
  // the ablation pipeline is the (4, 4) Poisson solve plus a side run with the QP phase off
  auto c = make(Experiment::Ablation, "semi-torus");
  R.p44 = run(c);
  c = make(Experiment::Poisson, "semi-torus");
  c.autotune.l = 3, c.autotune.l_bd = 2;
  R.p32 = run(c);
  R.have_poisson = true;
}

void criterion1(Runs& R) {
  consistency_runs(R);
  const double r3 = metric(R.c32, "fe_int").rate, r4 = metric(R.c44, "fe_int").rate;
  const bool ok = within(r3, 0.6, 1.4) && within(r4, 1.1, 1.9) && R.secs_consistency <= 600.0 &&
                  R.c32.failures() + R.c44.failures() == 0;
  record(1, ok,
         "interior FE rate l=3 " + fmt(r3) + " (want 1.0+-0.4), l=4 " + fmt(r4) + " (want 1.5+-0.4), pairwise l=4 " +
             list(metric(R.c44, "fe_int").pairwise) + ", runtime " + fmt(R.secs_consistency) + " s (budget 600)");
}

void criterion2(Runs& R) {
  consistency_runs(R);
  const double r2 = metric(R.c32, "fe_bd").rate, r3 = metric(R.c43, "fe_bd").rate, r4 = metric(R.c44, "fe_bd").rate;
  const bool ok = within(r2, 0.6, 1.4) && within(r3, 1.1, 1.9) && within(r4, 1.6, 2.4) && R.c43.failures() == 0;
  record(2, ok,
         "boundary FE rate l_bd=2 " + fmt(r2) + " (want 1.0+-0.4), l_bd=3 " + fmt(r3) + " (want 1.5+-0.4), l_bd=4 " +
             fmt(r4) + " (want 2.0+-0.4)");
}

void criterion3(Runs& R) {
  poisson_runs(R);
  int trials = 0, bad = 0, below = 0, qp_rows = 0;
  double min_gamma = kNaN;
  for (const auto& t : R.p44.trials) {
    if (t.N != 6400 || !t.ok()) continue;
    ++trials;
    bad += int(t.get("bad_center_int"));
    below += int(t.get("qp_gamma_below_1_int"));
    qp_rows += int(t.get("qp_int") + t.get("qp_best_int"));
    const double g = t.get("min_qp_gamma_int");
    if (!std::isnan(g) && !(g >= min_gamma)) min_gamma = g;
  }
  const int want = R.p44.config.trials;
  record(3, trials == want && bad == 0 && below == 0,
         "N=6400, " + std::to_string(trials) + "/" + std::to_string(want) + " trials: interior rows with w1>=0: " +
             std::to_string(bad) + ", QP-branch rows " + std::to_string(qp_rows) + ", of which gamma<1: " +
             std::to_string(below) + " (min gamma " + fmt(min_gamma) + ")");
}

void criterion4(Runs&) {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* surface;
    double lo, hi;
  };
  for (const Case& c : {Case{"semi-torus", 5e-7, 1.5e-5}, Case{"semi-sphere", 4e-6, 1.2e-4}}) {
    const auto r = run(make(Experiment::Eigen, c.surface, {6400, 12800, 25600}));
    const MetricSummary& m = metric(r, "eig_err_1");
    const double e = m.mean.empty() ? kNaN : m.mean[0];
    bool rates = m.pairwise.size() == 2;
    for (double p : m.pairwise) rates = rates && within(p, 1.2, 3.2);
    ok = ok && within(e, c.lo, c.hi) && rates && r.failures() == 0;
    detail += std::string(detail.empty() ? "" : "; ") + c.surface + " mean |dlambda1| at 6400 " + fmt(e) + " +- " +
              fmt(m.stddev.empty() ? kNaN : m.stddev[0]) + " (want [" + fmt(c.lo) + ", " + fmt(c.hi) +
              "]), pairwise " + list(m.pairwise) + " (want [1.2, 3.2])";
  }
  record(4, ok, detail);
}

void criterion5(Runs& R) {
  poisson_runs(R);
  bool ok = true;
  std::string detail;
  for (const auto* r : {&R.p32, &R.p44}) {
    const MetricSummary& m = metric(*r, "ie");
    ok = ok && strictly_decreasing(m.mean) && m.rate >= 1.0 && r->failures() == 0;
    detail += std::string(detail.empty() ? "" : "; ") + "(" + std::to_string(r->config.autotune.l) + "," +
              std::to_string(r->config.autotune.l_bd) + ") IE " + list(m.mean) + " rate " + fmt(m.rate);
  }
  record(5, ok, detail + " (want decreasing, rate >= 1)");
}

void criterion6(Runs& R) {
  poisson_runs(R);
  const MetricSummary& m = metric(R.p44, "inv_norm");
  const MetricSummary& n = metric(R.p44, "inv_norm_noqp");
  double lo = INFINITY, hi = 0.0;
  for (double v : m.max) lo = std::min(lo, v), hi = std::max(hi, v);
  const double ratio = hi / lo;
  record(6, m.max.size() == 4 && ratio < 3.0,
         "max inv_norm per N " + list(m.max) + ", ratio " + fmt(ratio) + " (want < 3); without QP " + list(n.max) +
             " (not gated)");
}

void criterion7(Runs&) {
  bool ok = true;
  std::string detail;
  for (const char* s : {"semi-sphere", "helical-pipe"}) {
    const auto r = run(make(Experiment::Heat, s));
    const MetricSummary& m = metric(r, "ie");
    const double terr = max_over_trials(r, "time_err");
    ok = ok && strictly_decreasing(m.mean) && terr < 1e-9 && r.failures() == 0;
    detail += std::string(detail.empty() ? "" : "; ") + s + " IE " + list(m.mean) + " (worst trial " + list(m.max) +
              ") oracle time error " + fmt(terr);
  }
  record(7, ok, detail + " (want decreasing, time error < 1e-9)");
}

void criterion8(Runs&) {
  bool ok = true;
  std::string detail;
  for (const auto& [s, N] : {std::pair<const char*, std::vector<Index>>{"sphere", {6400, 12800, 25600, 51200}},
                             std::pair<const char*, std::vector<Index>>{"paraboloid", {1600, 3200, 6400, 12800}}}) {
    const auto r = run(make(Experiment::Interface, s, N));
    const MetricSummary& m = metric(r, "ie");
    ok = ok && strictly_decreasing(m.mean) && r.failures() == 0;
    detail += std::string(s) + " IE " + list(m.mean) + "; ";
  }
  double mismatch = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) mismatch = std::max(mismatch, oracle::trivial_jump_mismatch(1600, seed));
  ok = ok && mismatch <= 1e-8;
  record(8, ok, detail + "trivial jump vs smooth solve " + fmt(mismatch) + " (want decreasing, <= 1e-8)");
}

void criterion9(Runs&) {
  // solver against enumeration
  int solved = 0, infeasible = 0, mismatched = 0;
  double worst = 0.0, worst_kkt = 0.0;
  for (std::uint64_t id = 0; id < 500; ++id) {
    const auto qp = oracle::random_program(id, id % 5 != 4);
    const auto sol = solve_qp(qp);
    const auto ref = oracle::enumerate_qp(qp);
    const bool opt = sol.status == QPStatus::Optimal;
    if (opt != ref.feasible) {
      ++mismatched;
      continue;
    }
    if (!opt) {
      ++infeasible;
      continue;
    }
    ++solved;
    worst = std::max(worst, (sol.z - ref.z).norm() / (1.0 + ref.z.norm()));
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
  }

  // equality-only stencil programs against GMLS weights
  const auto cloud = sample_cloud_total(semi_torus(), 3200, 4);
  SpatialIndex all(cloud.ambient);
  double gmls_gap = 0.0;
  for (Index i = 0; i < cloud.n_interior; i += 101) {
    const auto sys = build_local_system(cloud, knn(all, cloud.ambient, i, 30), 4, 3);
    QuadraticProgram qp;
    qp.H = sys.lambda.cwiseInverse();
    qp.E = sys.P.transpose();
    qp.e = laplacian_poly_row(4).transpose();
    const auto sol = solve_qp(qp);
    const Eigen::RowVectorXd gmls = laplacian_poly_row(4) * sys.gmls;
    gmls_gap = std::max(gmls_gap, sol.status == QPStatus::Optimal
                                      ? (sol.z.transpose() - gmls).norm() / (1.0 + gmls.norm())
                                      : INFINITY);
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
  }

  // plain and restricted neighbor queries against a linear scan
  std::vector<Index> ids(static_cast<std::size_t>(cloud.size()));
  std::iota(ids.begin(), ids.end(), Index{0});
  std::vector<Index> interior(ids.begin(), ids.begin() + cloud.n_interior);
  SpatialIndex inner(cloud.ambient, interior);
  int plain_bad = 0, restricted_bad = 0, restricted_n = 0;
  for (std::uint64_t q = 0; q < 200; ++q) {
    const Vec3 x(6 * uniform01(9, 0, 3 * q) - 3, 6 * uniform01(9, 0, 3 * q + 1) - 3, 2 * uniform01(9, 0, 3 * q + 2) - 1);
    const Index k = 1 + static_cast<Index>(q % 60);
    const auto hits = all.nearest(x, k);
    const auto ref = oracle::scan_knn(cloud.ambient, ids, x, k);
    bool same = hits.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i) same = hits[i].id == ref[i];
    plain_bad += !same;
  }
  const Index nB = cloud.size() - cloud.n_interior;
  for (; restricted_n < 200; ++restricted_n) {
    const Index b = cloud.n_interior + restricted_n % nB;
    const double omega = std::array{1.0 / 3.0, 0.1, 1.0}[std::size_t(restricted_n % 3)];
    const Index k = 20 + (restricted_n % 30);
    const Vec3& n = *cloud.conormals[static_cast<std::size_t>(b)];
    restricted_bad += restricted_knn(inner, cloud.ambient, b, n, k, omega).neighbors !=
                      oracle::scan_restricted(cloud.ambient, interior, b, n, k, omega);
  }

  const bool ok = mismatched == 0 && worst <= 1e-9 && gmls_gap <= 1e-9 && plain_bad == 0 && restricted_bad == 0 &&
                  restricted_n == 200 && worst_kkt <= 1e-8;
  record(9, ok,
         "QP vs enumeration: " + std::to_string(solved) + " optimal, " + std::to_string(infeasible) +
             " infeasible, " + std::to_string(mismatched) + " status mismatches, max rel gap " + fmt(worst) +
             "; GMLS gap " + fmt(gmls_gap) + "; knn mismatches " + std::to_string(plain_bad) + "/200, restricted " +
             std::to_string(restricted_bad) + "/" + std::to_string(restricted_n) + "; max KKT " + fmt(worst_kkt));
}

void criterion10(Runs& R) {
  consistency_runs(R);
  poisson_runs(R);
  double repro = 0.0;
  for (const auto* r : {&R.c32, &R.c43, &R.c44, &R.p32, &R.p44})
    repro = std::max({repro, max_over_trials(*r, "max_repro_int"), max_over_trials(*r, "max_repro_bd")});
  {
    auto c = make(Experiment::Interface, "paraboloid", {1600, 3200});
    c.trials = 2;
    repro = std::max(repro, max_over_trials(run(c), "max_repro"));
  }

  // Schur reduction on small assembled systems against dense elimination
  double schur_gap = 0.0;
  const AutotuneConfig at;
  for (const char* name : {"semi-torus", "semi-sphere", "helical-pipe", "paraboloid"}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const PointCloud cloud = sample_cloud_total(surface_from_name(name), 200, seed);
      const SparseMatrix L = assemble_interior(cloud, at).matrix();
      const SparseMatrix B = assemble_boundary(cloud, at, true).matrix();
      const SchurSystem sys = schur_reduce(L, B);
      const Index nI = cloud.n_interior, nB = cloud.size() - nI;
      const Eigen::MatrixXd Ld(L), Bd(B);
      const Eigen::MatrixXd ref =
          Ld.leftCols(nI) - Ld.rightCols(nB) * Bd.rightCols(nB).inverse() * Bd.leftCols(nI);
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      schur_gap = std::max(schur_gap, (Eigen::MatrixXd(sys.A) - ref).cwiseAbs().maxCoeff() / scale);
    }
  }
  record(10, repro <= 1e-8 && schur_gap <= 1e-12,
         "max reproduction error over all assembled rows " + fmt(repro) + " (want <= 1e-8); Schur vs dense " +
             fmt(schur_gap) + " relative to max |entry| (want <= 1e-12)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance run");
  std::vector<int> only;
  bool strict = false;
  std::string report_path;
  app.add_option("--trials", trials_override, "trials per size (default 12)");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  app.add_option("--report", report_path, "also write the verdict lines to this file");
  CLI11_PARSE(app, argc, argv);
  if (!report_path.empty() && !(report = std::fopen(report_path.c_str(), "w"))) {
    std::fprintf(stderr, "cannot write %s\n", report_path.c_str());
    return 2;
  }
  const std::set<int> pick(only.begin(), only.end());
  auto want = [&](int id) { return pick.empty() || pick.count(id) > 0; };

  Runs R;
  void (*steps[])(Runs&) = {criterion1, criterion2, criterion3, criterion4, criterion5,
                            criterion6, criterion7, criterion8, criterion9, criterion10};
  // cheap criteria first
  for (int id : {9, 1, 2, 10, 3, 5, 6, 4, 7, 8}) {
    if (!want(id)) continue;
    try {
      steps[id - 1](R);
    } catch (const std::exception& e) {
      record(id, false, std::string("error: ") + e.what());
    }
  }

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int passed = 0;
  std::printf("\nSUMMARY\n");
  for (const auto& v : verdicts) {
    std::printf("CRITERION %2d: %s\n", v.id, v.pass ? "PASS" : "FAIL");
    passed += v.pass;
  }
  std::printf("%d/%zu criteria pass\n", passed, verdicts.size());
  if (report) {
    std::fprintf(report, "%d/%zu criteria pass\n", passed, verdicts.size());
    std::fclose(report);
  }
  return strict && passed != int(verdicts.size()) ? 1 : 0;
}
