#include "surfpde/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace surfpde {

namespace {

constexpr const char* kExperimentNames[] = {"poisson", "consistency", "eigen", "heat", "interface", "ablation"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  v = trim(v);
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size())
    throw ConfigError("bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view v) {
  std::vector<T> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_number<T>(key, v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("empty list for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("bad boolean '" + std::string(v) + "' for " + std::string(key));
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

// Branch counts, sign violations, QP gamma floor and reproduction over
// every row of one operator block.
struct RowStats {
  int qp = 0, qp_best = 0, bad_center = 0, qp_gamma_below_1 = 0;
  double min_qp_gamma = kNaN;
  double max_repro = 0.0;
};

RowStats row_stats(const PointCloud& cloud, const OperatorMatrix& op, const AutotuneConfig& at, bool robin) {
  RowStats s;
  for (Index k = 0; k < op.size(); ++k) {
    const WeightRow& r = op.rows[static_cast<std::size_t>(k)];
    const Index node = op.nodes[static_cast<std::size_t>(k)];
    const bool lap = r.kind == RowKind::Laplacian;
    const double w1 = op.center_before_identity[static_cast<std::size_t>(k)];
    if (lap ? w1 >= 0.0 : w1 <= 0.0) ++s.bad_center;
    if (r.branch == Branch::Qp) ++s.qp;
    if (r.branch == Branch::QpBestGamma) ++s.qp_best;
    if (r.branch != Branch::RbfFd) {
      if (!(r.gamma >= s.min_qp_gamma)) s.min_qp_gamma = r.gamma;
      if (r.gamma < 1.0) ++s.qp_gamma_below_1;
    }
    const Vec3* n = lap ? nullptr : &*cloud.conormals[static_cast<std::size_t>(node)];
    const double e = reproduction_error(cloud.ambient, cloud.frames[static_cast<std::size_t>(node)], n, r,
                                        lap ? at.l : at.l_bd, (!lap && robin) ? 1.0 : 0.0, at.radius_multiple);
    s.max_repro = std::max(s.max_repro, e);
  }
  return s;
}

void add_row_stats(TrialResult& t, const std::string& tag, const RowStats& s) {
  t.extra.emplace_back("qp_" + tag, s.qp);
  t.extra.emplace_back("qp_best_" + tag, s.qp_best);
  t.extra.emplace_back("bad_center_" + tag, s.bad_center);
  t.extra.emplace_back("min_qp_gamma_" + tag, s.min_qp_gamma);
  t.extra.emplace_back("qp_gamma_below_1_" + tag, s.qp_gamma_below_1);
  t.extra.emplace_back("max_repro_" + tag, s.max_repro);
}

void append_diagnostics(TrialResult& t, const char* block, const OperatorMatrix& op) {
  std::ostringstream os;
  os.precision(10);
  for (Index k = 0; k < op.size(); ++k) {
    const WeightRow& r = op.rows[static_cast<std::size_t>(k)];
    os << experiment_name(t.experiment) << ',' << t.surface << ',' << t.N << ',' << t.trial << ',' << block << ','
       << op.nodes[static_cast<std::size_t>(k)] << ',' << branch_name(r.branch) << ',' << r.K << ',' << r.gamma << ','
       << op.center_before_identity[static_cast<std::size_t>(k)] << '\n';
  }
  t.diagnostics += os.str();
}

struct Discretization {
  PointCloud cloud;
  OperatorMatrix L, B;
};

Discretization discretize(const SurfaceDescriptor& s, Index N, std::uint64_t seed, const AutotuneConfig& at,
                          bool robin) {
  Discretization d{sample_cloud_total(s, N, seed), {}, {}};
  d.L = assemble_interior(d.cloud, at);
  d.B = assemble_boundary(d.cloud, at, robin);
  return d;
}

// Robin Poisson: Laplacian u = f inside, du/dn + u = h on the boundary.
void poisson_pipeline(const ExperimentConfig& cfg, const AutotuneConfig& at, const SurfaceDescriptor& s,
                      TrialResult& t, const std::string& suffix, bool solve_system) {
  const Discretization d = discretize(s, t.N, t.seed, at, true);
  const FieldSamples u = sample_field(d.cloud, poisson_solution());
  const Eigen::VectorXd u_B = u.value.tail(d.cloud.n_boundary);
  const Eigen::VectorXd h = u.conormal + u_B;
  const double fe_int = forward_error(d.L, u.value, u.laplacian);
  const double fe_bd = forward_error(d.B, u.value, h);
  const RowStats si = row_stats(d.cloud, d.L, at, false), sb = row_stats(d.cloud, d.B, at, true);

  double ie = kNaN, inv = kNaN, residual = kNaN;
  if (solve_system) {
    try {
      const SchurSystem sys = schur_reduce(d.L, d.B);
      const SparseLU lu(sys.A);
      const SolveResult r = solve(sys, lu, u.laplacian, h);
      ie = inverse_error(concat(r.u_I, r.u_B), u.value);
      inv = inv_norm_estimate(lu);
      residual = r.residual;
    } catch (const SolveError&) {
      if (suffix.empty()) throw;  // only the ablation's plain variant may be singular
      inv = std::numeric_limits<double>::infinity();
    }
  }
  if (suffix.empty()) {
    t.fe_int = fe_int;
    t.fe_bd = fe_bd;
    t.ie = ie;
    t.inv_norm = inv;
    if (solve_system) t.extra.emplace_back("residual", residual);
    add_row_stats(t, "int", si);
    add_row_stats(t, "bd", sb);
    if (cfg.diagnostics) {
      append_diagnostics(t, "interior", d.L);
      append_diagnostics(t, "boundary", d.B);
    }
  } else {
    t.extra.emplace_back("fe_int" + suffix, fe_int);
    t.extra.emplace_back("fe_bd" + suffix, fe_bd);
    t.extra.emplace_back("ie" + suffix, ie);
    t.extra.emplace_back("inv_norm" + suffix, inv);
    t.extra.emplace_back("bad_center_int" + suffix, si.bad_center);
    t.extra.emplace_back("bad_center_bd" + suffix, sb.bad_center);
  }
}

void eigen_pipeline(const ExperimentConfig& cfg, const SurfaceDescriptor& s, TrialResult& t) {
  const Discretization d = discretize(s, t.N, t.seed, cfg.autotune, true);
  const SchurSystem sys = schur_reduce(d.L, d.B);
  const SparseLU lu(sys.A);
  const int count = *std::max_element(cfg.modes.begin(), cfg.modes.end());
  const auto pairs = smallest_eigenpairs(sys.A, lu, count);
  const auto ref = reference_eigenvalues(s);
  const std::vector<bool> close = near_degenerate(pairs);
  int complex_modes = 0, degenerate_modes = 0;
  for (int m : cfg.modes) {
    const EigenPair& p = pairs[static_cast<std::size_t>(m - 1)];
    if (p.imag != 0.0) ++complex_modes;
    if (close[static_cast<std::size_t>(m - 1)]) ++degenerate_modes;
    const auto it = ref.find(m);
    t.eig_err.push_back(it == ref.end() ? kNaN : std::abs(p.value - it->second));
  }
  for (int m : cfg.modes) t.extra.emplace_back("lambda_" + std::to_string(m), pairs[static_cast<std::size_t>(m - 1)].value);
  t.extra.emplace_back("complex_modes", complex_modes);
  t.extra.emplace_back("near_degenerate_modes", degenerate_modes);
  add_row_stats(t, "int", row_stats(d.cloud, d.L, cfg.autotune, false));
  add_row_stats(t, "bd", row_stats(d.cloud, d.B, cfg.autotune, true));
  if (cfg.diagnostics) {
    append_diagnostics(t, "interior", d.L);
    append_diagnostics(t, "boundary", d.B);
  }
}

// u = exp(-t) v: u_t = nu Laplacian u + f, du/dn + u = h.
void heat_pipeline(const ExperimentConfig& cfg, const SurfaceDescriptor& s, TrialResult& t) {
  const Discretization d = discretize(s, t.N, t.seed, cfg.autotune, true);
  const FieldSamples v = sample_field(d.cloud, heat_profile(s));
  const Index nI = d.cloud.n_interior;
  const Eigen::VectorXd v_I = v.value.head(nI), v_B = v.value.tail(d.cloud.n_boundary);
  const SchurSystem sys = schur_reduce(d.L, d.B);
  const Eigen::VectorXd h0 = v_B + v.conormal;
  const Eigen::VectorXd g0 = -v_I - cfg.nu * v.laplacian + cfg.nu * sys.boundary_lift(h0);
  const BdfIntegrator::Forcing g = [&](double time) -> Eigen::VectorXd { return std::exp(-time) * g0; };

  BdfIntegrator bdf(sys.A, cfg.nu, cfg.dt, cfg.bdf_order);
  bdf.reset(v_I, 0.0);
  bdf.startup(g, cfg.startup_substeps);
  bdf.advance_to(cfg.t_end, g);
  const double T = bdf.time();
  const Eigen::VectorXd u_B = sys.back_substitute(bdf.current(), std::exp(-T) * h0);
  t.ie = inverse_error(concat(bdf.current(), u_B), std::exp(-T) * v.value);

  // forcing chosen so exp(-t) v_I solves the semi-discrete system exactly
  const Eigen::VectorXd g_or0 = -v_I - cfg.nu * (sys.A * v_I);
  const BdfIntegrator::Forcing g_or = [&](double time) -> Eigen::VectorXd { return std::exp(-time) * g_or0; };
  bdf.reset(v_I, 0.0);
  bdf.startup(g_or, cfg.startup_substeps);
  bdf.advance_to(cfg.t_end, g_or);
  t.extra.emplace_back("time_err", (bdf.current() - std::exp(-bdf.time()) * v_I).cwiseAbs().maxCoeff());
  t.extra.emplace_back("t_end", T);
  add_row_stats(t, "int", row_stats(d.cloud, d.L, cfg.autotune, false));
  add_row_stats(t, "bd", row_stats(d.cloud, d.B, cfg.autotune, true));
}

void interface_pipeline(const ExperimentConfig& cfg, const SurfaceDescriptor& s, TrialResult& t) {
  const InterfaceProblem pb = interface_problem_for(s);
  const InterfaceCloud c = sample_interface_cloud(pb, t.N, t.seed);
  const InterfaceSystem sys = assemble_interface_system(pb, c, cfg.autotune);
  const SparseLU lu(sys.A);
  const Eigen::VectorXd u = lu.solve(sys.rhs);
  t.ie = inverse_error(u, interface_exact(pb, c));
  t.extra.emplace_back("residual", (sys.A * u - sys.rhs).cwiseAbs().maxCoeff());
  int qp = 0, qp_best = 0;
  double repro = 0.0;
  for (std::size_t k = 0; k < sys.rows.size(); ++k) {  // row k belongs to unknown k
    const WeightRow& r = sys.rows[k];
    qp += r.branch == Branch::Qp;
    qp_best += r.branch == Branch::QpBestGamma;
    const bool lap = r.kind == RowKind::Laplacian;
    const Vec3* n = lap ? nullptr : &*c.nodes.conormals[k];
    repro = std::max(repro, reproduction_error(c.nodes.ambient, c.nodes.frames[k], n, r,
                                               lap ? cfg.autotune.l : cfg.autotune.l_bd, 0.0,
                                               cfg.autotune.radius_multiple));
  }
  t.extra.emplace_back("n_interface", double(c.n_interface));
  t.extra.emplace_back("qp_rows", qp);
  t.extra.emplace_back("qp_best_rows", qp_best);
  t.extra.emplace_back("max_repro", repro);
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

nlohmann::ordered_json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json();
}

}  // namespace

Experiment experiment_from_name(std::string_view name) {
  for (int i = 0; i < 6; ++i)
    if (name == kExperimentNames[i]) return static_cast<Experiment>(i);
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

const char* experiment_name(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

std::string ExperimentConfig::resolved_surface() const {
  if (!surface.empty()) return surface;
  switch (experiment) {
    case Experiment::Heat: return "semi-sphere";
    case Experiment::Interface: return "sphere";
    default: return "semi-torus";
  }
}

void ExperimentConfig::validate() const {
  autotune.validate();
  const SurfaceDescriptor s = surface_from_name(resolved_surface());
  if (N.empty()) throw ConfigError("N list is empty");
  for (Index n : N)
    if (n < 100) throw ConfigError("N must be at least 100");
  if (trials < 1) throw ConfigError("trials must be positive");
  if (!(dt > 0.0) || !(t_end > 0.0) || !(nu > 0.0)) throw ConfigError("dt, T_end and nu must be positive");
  if (bdf_order < 1 || bdf_order > 6) throw ConfigError("BDF order must lie in 1..6");
  if (startup_substeps < 1) throw ConfigError("startup substeps must be positive");
  if (modes.empty()) throw ConfigError("mode list is empty");
  for (int m : modes)
    if (m < 1) throw ConfigError("modes are 1-based");
  switch (experiment) {
    case Experiment::Poisson:
    case Experiment::Consistency:
    case Experiment::Ablation:
    case Experiment::Eigen:
    case Experiment::Heat:
      if (!s.has_boundary()) throw ConfigError(std::string(experiment_name(experiment)) + " needs a surface with boundary");
      break;
    case Experiment::Interface: interface_problem_for(s); break;
  }
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  AutotuneConfig& at = cfg.autotune;
  if (key == "surface") cfg.surface = std::string(value);
  else if (key == "N") cfg.N = parse_list<Index>(key, value);
  else if (key == "trials") cfg.trials = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "l") at.l = parse_number<int>(key, value);
  else if (key == "lbd" || key == "l_bd") at.l_bd = parse_number<int>(key, value);
  else if (key == "kappa") at.kappa = parse_number<int>(key, value);
  else if (key == "omega") at.omega = parse_number<double>(key, value);
  else if (key == "gamma") at.gamma_threshold = parse_number<double>(key, value);
  else if (key == "K0") at.K0 = parse_number<Index>(key, value);
  else if (key == "Kmax" || key == "K_max") at.K_max = parse_number<Index>(key, value);
  else if (key == "delta") at.delta = parse_number<double>(key, value);
  else if (key == "radius_multiple") at.radius_multiple = parse_number<double>(key, value);
  else if (key == "qp") at.use_qp = parse_bool(key, value);
  else if (key == "dt") cfg.dt = parse_number<double>(key, value);
  else if (key == "T_end" || key == "t_end") cfg.t_end = parse_number<double>(key, value);
  else if (key == "nu") cfg.nu = parse_number<double>(key, value);
  else if (key == "bdf_order") cfg.bdf_order = parse_number<int>(key, value);
  else if (key == "substeps") cfg.startup_substeps = parse_number<int>(key, value);
  else if (key == "modes") cfg.modes = parse_list<int>(key, value);
  else if (key == "diagnostics") cfg.diagnostics = parse_bool(key, value);
  else if (key == "out") cfg.out = std::string(value);
  else if (key == "fast") {
    if (parse_bool(key, value)) cfg.trials = 3;
  } else
    throw ConfigError("unknown setting '" + std::string(key) + "'");
}

void load_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::string section = "common";
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "common") experiment_from_name(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section == "common" || section == experiment_name(cfg.experiment))
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_config_text(cfg, ss.str());
}

std::uint64_t trial_seed(std::uint64_t base, Index N, int trial) {
  return splitmix(splitmix(splitmix(base) ^ static_cast<std::uint64_t>(N)) ^ static_cast<std::uint64_t>(trial));
}

double rms_error(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  if (approx.size() != exact.size()) throw std::invalid_argument("error vectors differ in length");
  if (approx.size() == 0) return 0.0;
  return std::sqrt((approx - exact).squaredNorm() / double(approx.size()));
}

double forward_error(const OperatorMatrix& op, const Eigen::VectorXd& u, const Eigen::VectorXd& target) {
  if (u.size() != op.cols || target.size() != op.size()) throw std::invalid_argument("forward error: size mismatch");
  Eigen::VectorXd applied(op.size());
  for (Index k = 0; k < op.size(); ++k) {
    const WeightRow& r = op.rows[static_cast<std::size_t>(k)];
    double acc = 0.0;
    for (std::size_t j = 0; j < r.indices.size(); ++j) acc += r.weights[j] * u[r.indices[j]];
    applied[k] = acc;
  }
  return rms_error(applied, target);
}

double inverse_error(const Eigen::VectorXd& u_num, const Eigen::VectorXd& u_exact) { return rms_error(u_num, u_exact); }

double fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("rate fit needs two or more points");
  double sx = 0, sy = 0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw std::invalid_argument("rate fit needs positive N and errors");
    sx += std::log(n);
    sy += std::log(e);
  }
  const double mx = sx / double(points.size()), my = sy / double(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& [n, e] : points) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(e) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate fit needs distinct N");
  return -sxy / sxx;
}

std::vector<double> pairwise_rates(const std::vector<std::pair<double, double>>& points) {
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    if (!(sorted[k].second > 0.0) || !(sorted[k + 1].second > 0.0))
      throw std::invalid_argument("pairwise rates need positive errors");
    out.push_back(std::log2(sorted[k].second / sorted[k + 1].second));
  }
  return out;
}

double TrialResult::get(std::string_view metric) const {
  if (metric == "fe_int") return fe_int;
  if (metric == "fe_bd") return fe_bd;
  if (metric == "ie") return ie;
  if (metric == "inv_norm") return inv_norm;
  if (metric == "secs") return secs;
  if (metric.starts_with("eig_err_")) {
    const int mode = parse_number<int>("mode", metric.substr(8));
    for (std::size_t k = 0; k < modes.size() && k < eig_err.size(); ++k)
      if (modes[k] == mode) return eig_err[k];
    return kNaN;
  }
  for (const auto& [k, v] : extra)
    if (k == metric) return v;
  return kNaN;
}

int ExperimentReport::failures() const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return !t.ok(); }));
}

std::vector<std::string> ExperimentReport::metric_names() const {
  std::vector<std::string> names{"fe_int", "fe_bd", "ie", "inv_norm", "secs"};
  for (int m : config.modes)
    if (config.experiment == Experiment::Eigen) names.push_back("eig_err_" + std::to_string(m));
  std::set<std::string> seen(names.begin(), names.end());
  for (const auto& t : trials)
    for (const auto& [k, v] : t.extra)
      if (seen.insert(k).second) names.push_back(k);
  return names;
}

TrialResult run_trial(const ExperimentConfig& cfg, Index N, int trial) {
  TrialResult t;
  t.experiment = cfg.experiment;
  t.surface = cfg.resolved_surface();
  t.N = N;
  t.trial = trial;
  t.seed = trial_seed(cfg.seed, N, trial);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SurfaceDescriptor s = surface_from_name(t.surface);
    switch (cfg.experiment) {
      case Experiment::Poisson: poisson_pipeline(cfg, cfg.autotune, s, t, "", true); break;
      case Experiment::Consistency: poisson_pipeline(cfg, cfg.autotune, s, t, "", false); break;
      case Experiment::Ablation: {
        poisson_pipeline(cfg, cfg.autotune, s, t, "", true);
        AutotuneConfig plain = cfg.autotune;
        plain.use_qp = false;
        poisson_pipeline(cfg, plain, s, t, "_noqp", true);
        break;
      }
      case Experiment::Eigen: eigen_pipeline(cfg, s, t); break;
      case Experiment::Heat: heat_pipeline(cfg, s, t); break;
      case Experiment::Interface: interface_pipeline(cfg, s, t); break;
    }
  } catch (const std::exception& e) {
    t.status = std::string("error: ") + e.what();
  }
  if (cfg.experiment == Experiment::Eigen) {
    t.modes = cfg.modes;
    if (t.eig_err.size() != cfg.modes.size()) t.eig_err.assign(cfg.modes.size(), kNaN);
  }
  t.secs = seconds_since(t0);
  return t;
}

MetricSummary summarize(const std::vector<TrialResult>& trials, std::string_view metric) {
  std::map<Index, std::vector<double>> by_n;
  for (const auto& t : trials) {
    if (!t.ok()) continue;
    const double v = t.get(metric);
    if (std::isfinite(v)) by_n[t.N].push_back(v);
  }
  MetricSummary s;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, vals] : by_n) {
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / double(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    s.N.push_back(n);
    s.mean.push_back(mean);
    s.stddev.push_back(vals.size() > 1 ? std::sqrt(var / double(vals.size() - 1)) : 0.0);
    s.max.push_back(*std::max_element(vals.begin(), vals.end()));
    pts.emplace_back(double(n), mean);
  }
  const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
  if (pts.size() >= 2 && positive) {
    s.rate = fit_rate(pts);
    s.pairwise = pairwise_rates(pts);
  }
  return s;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  report.surface = cfg.resolved_surface();
  const int cells = static_cast<int>(cfg.N.size()) * cfg.trials;
  report.trials.resize(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < cells; ++c)
    report.trials[static_cast<std::size_t>(c)] = run_trial(cfg, cfg.N[static_cast<std::size_t>(c / cfg.trials)], c % cfg.trials);
  for (const auto& name : report.metric_names()) report.summary[name] = summarize(report.trials, name);
  return report;
}

void write_trials_csv(std::ostream& os, const ExperimentReport& report) {
  std::vector<std::string> extras;
  std::set<std::string> seen;
  for (const auto& t : report.trials)
    for (const auto& [k, v] : t.extra)
      if (seen.insert(k).second) extras.push_back(k);
  os << "experiment,surface,N,trial,seed,fe_int,fe_bd,ie,inv_norm,secs";
  const bool eig = report.config.experiment == Experiment::Eigen;
  if (eig)
    for (int m : report.config.modes) os << ",eig_err_" << m;
  for (const auto& k : extras) os << ',' << k;
  os << ",status\n";
  for (const auto& t : report.trials) {
    os << experiment_name(t.experiment) << ',' << t.surface << ',' << t.N << ',' << t.trial << ',' << t.seed << ','
       << format_number(t.fe_int) << ',' << format_number(t.fe_bd) << ',' << format_number(t.ie) << ','
       << format_number(t.inv_norm) << ',' << format_number(t.secs);
    if (eig)
      for (std::size_t k = 0; k < report.config.modes.size(); ++k)
        os << ',' << format_number(k < t.eig_err.size() ? t.eig_err[k] : kNaN);
    for (const auto& k : extras) os << ',' << format_number(t.get(k));
    os << ',' << csv_field(t.status) << '\n';
  }
}

void write_summary_json(std::ostream& os, const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  nlohmann::ordered_json j;
  j["experiment"] = experiment_name(c.experiment);
  j["surface"] = report.surface;
  j["config"] = {{"N", c.N},
                 {"trials", c.trials},
                 {"seed", c.seed},
                 {"l", c.autotune.l},
                 {"l_bd", c.autotune.l_bd},
                 {"kappa", c.autotune.kappa},
                 {"omega", c.autotune.omega},
                 {"gamma", c.autotune.gamma_threshold},
                 {"K0", c.autotune.K0},
                 {"K_max", c.autotune.K_max},
                 {"delta", c.autotune.delta},
                 {"radius_multiple", c.autotune.radius_multiple},
                 {"qp", c.autotune.use_qp},
                 {"dt", c.dt},
                 {"T_end", c.t_end},
                 {"nu", c.nu},
                 {"bdf_order", c.bdf_order},
                 {"modes", c.modes}};
  j["failures"] = report.failures();
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& name : report.metric_names()) {
    const auto it = report.summary.find(name);
    if (it == report.summary.end() || it->second.N.empty()) continue;
    const MetricSummary& s = it->second;
    nlohmann::ordered_json m;
    m["N"] = s.N;
    auto arr = [](const std::vector<double>& v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (double x : v) a.push_back(number_or_null(x));
      return a;
    };
    m["mean"] = arr(s.mean);
    m["std"] = arr(s.stddev);
    m["max"] = arr(s.max);
    m["rate"] = number_or_null(s.rate);
    m["pairwise_rates"] = arr(s.pairwise);
    metrics[name] = m;
  }
  j["metrics"] = metrics;
  os << j.dump(2) << '\n';
}

void write_diagnostics_csv(std::ostream& os, const ExperimentReport& report) {
  os << "experiment,surface,N,trial,block,node,branch,K,gamma,w1\n";
  for (const auto& t : report.trials) os << t.diagnostics;
}

void write_reports(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  auto open = [&](const char* name) {
    std::ofstream f(base / name);
    if (!f) throw std::runtime_error("cannot write " + (base / name).string());
    return f;
  };
  {
    auto f = open("trials.csv");
    write_trials_csv(f, report);
  }
  {
    auto f = open("summary.json");
    write_summary_json(f, report);
  }
  if (report.config.diagnostics) {
    auto f = open("diagnostics.csv");
    write_diagnostics_csv(f, report);
  }
}

}  // namespace surfpde
