#include <CLI11.hpp>

#include <iostream>

#include "surfpde/harness.hpp"

using namespace surfpde;

namespace {

void print_summary(const ExperimentReport& r) {
  std::cout << experiment_name(r.config.experiment) << " on " << r.surface << ", " << r.config.trials
            << " trials\n";
  for (const auto& name : r.metric_names()) {
    const auto it = r.summary.find(name);
    if (it == r.summary.end() || it->second.N.empty() || name == "secs") continue;
    const MetricSummary& s = it->second;
    std::cout << "  " << name << ':';
    for (std::size_t k = 0; k < s.N.size(); ++k) std::cout << "  N=" << s.N[k] << ' ' << s.mean[k];
    if (std::isfinite(s.rate)) std::cout << "  rate " << s.rate;
    std::cout << '\n';
  }
  for (const auto& t : r.trials)
    if (!t.ok()) std::cout << "  FAILED N=" << t.N << " trial " << t.trial << ": " << t.status << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mesh-free surface PDE experiments on random point clouds"};
  std::string experiment, config_file;
  std::vector<std::pair<std::string, std::string>> settings;
  app.add_option("experiment", experiment, "poisson | consistency | eigen | heat | interface | ablation")
      ->required()
      ->check(CLI::IsMember({"poisson", "consistency", "eigen", "heat", "interface", "ablation"}));
  app.add_option("--config", config_file, "key = value file; flags override it");

  // every flag is forwarded as a setting, in command-line order
  auto forward = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        flag, [&settings, key](const std::string& v) { settings.emplace_back(key, v); }, help);
  };
  forward("--surface", "surface", "semi-torus | semi-sphere | helical-pipe | sphere | paraboloid | plane");
  forward("--N", "N", "comma-separated point counts");
  forward("--trials", "trials", "independent trials per N");
  forward("--seed", "seed", "base seed");
  forward("--l", "l", "interior polynomial degree");
  forward("--lbd", "lbd", "boundary polynomial degree");
  forward("--kappa", "kappa", "polyharmonic exponent");
  forward("--omega", "omega", "co-normal shrink factor of the boundary stencil metric");
  forward("--gamma", "gamma", "dominance threshold");
  forward("--K0", "K0", "initial stencil size (0: automatic)");
  forward("--Kmax", "Kmax", "largest stencil size");
  forward("--delta", "delta", "ridge parameter");
  forward("--dt", "dt", "time step");
  forward("--T-end", "T_end", "final time");
  forward("--nu", "nu", "diffusion coefficient");
  forward("--modes", "modes", "comma-separated eigenvalue indices");
  forward("--out", "out", "report directory");
  bool fast = false, diagnostics = false, no_qp = false;
  app.add_flag("--fast", fast, "3 trials per N (not comparable to 12-trial statistics)");
  app.add_flag("--diagnostics", diagnostics, "write per-row diagnostics.csv");
  app.add_flag("--no-qp", no_qp, "plain RBF-FD rows with best-gamma fallback");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg.experiment = experiment_from_name(experiment);
    if (!config_file.empty()) load_config_file(cfg, config_file);
    for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
    if (fast) cfg.trials = 3;
    if (diagnostics) cfg.diagnostics = true;
    if (no_qp) cfg.autotune.use_qp = false;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "surfpde: " << e.what() << '\n';
    return 2;
  }

  const ExperimentReport report = run_experiment(cfg);
  print_summary(report);
  if (!cfg.out.empty()) {
    try {
      write_reports(report, cfg.out);
    } catch (const std::exception& e) {
      std::cerr << "surfpde: " << e.what() << '\n';
      return 2;
    }
  }
  return report.failures() == 0 ? 0 : 1;
}
