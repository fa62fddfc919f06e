#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "igs/experiment.hpp"
#include "igs/geometry.hpp"
#include "igs/verification.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef IGS_DEFAULT_CONFIGS_DIR
#define IGS_DEFAULT_CONFIGS_DIR "configs"
#endif

std::string resolve_config(const std::string& arg, const std::string& configs_dir) {
  if (fs::exists(arg)) return arg;
  const std::string candidate = configs_dir + "/" + arg + ".json";
  if (fs::exists(candidate)) return candidate;
  throw std::invalid_argument("no such config file or preset: " + arg);
}

int cmd_run(const std::string& config_arg, const std::string& configs_dir,
            const igs::RunOverrides& overrides) {
  const igs::ExperimentConfig config =
      igs::load_config(resolve_config(config_arg, configs_dir));
  const int code = igs::run_experiment(config, overrides);
  if (code == igs::kExitDivergence)
    std::cerr << "warning: at least one repetition diverged; partial outputs kept\n";
  return code;
}

int cmd_presets(const std::string& configs_dir) {
  if (!fs::is_directory(configs_dir)) {
    std::cerr << "configs directory not found: " << configs_dir << "\n";
    return igs::kExitConfigError;
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(configs_dir))
    if (entry.path().extension() == ".json")
      names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    const igs::ExperimentConfig config =
        igs::load_config(configs_dir + "/" + name + ".json");
    std::cout << name << "  (n=" << config.problem.n << ", reps="
              << config.problem.reps;
    for (const auto& s : config.solvers)
      std::cout << ", " << igs::algorithm_name(s.algorithm);
    std::cout << ")";
    if (!config.notes.empty()) std::cout << "  -- " << config.notes;
    std::cout << "\n";
  }
  return igs::kExitOk;
}

int cmd_coherence(const std::string& config_arg, const std::string& configs_dir) {
  const igs::ExperimentConfig config =
      igs::load_config(resolve_config(config_arg, configs_dir));
  const igs::Problem problem =
      igs::build_problem(config.problem, config.problem.sigma, 0);
  const igs::CoherenceReport report =
      igs::coherence(problem.X, problem.partition, /*want_per_pair=*/true);
  std::cout << "n " << problem.n() << "  p " << problem.p() << "  groups "
            << problem.partition.num_groups() << "\n";
  std::cout << "delta_in  " << report.delta_in << "\n";
  std::cout << "delta_out " << report.delta_out << "\n";
  if (problem.noise)
    std::cout << "noise_linf " << igs::noise_linf(problem.X, *problem.noise) << "\n";
  return igs::kExitOk;
}

int cmd_verify(const std::string& suite) {
  const auto results = igs::run_suite(suite);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
    ok &= r.passed;
  }
  if (suite == "brackets" || suite == "all") {
    // A concrete non-commutation witness at a generic point.
    igs::GroupPartition part(std::vector<igs::Index>{2, 3});
    igs::GroupedParams params{igs::VectorXd(2), igs::VectorXd(5)};
    params.u << 1.0, -0.7;
    params.v << 0.3, -1.1, 0.9, 0.4, -0.2;
    std::cout << igs::commutation_report(params, part);
  }
  return ok ? igs::kExitOk : igs::kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-sparse regression via reparameterized gradient descent"};
  app.require_subcommand(1);
  std::string configs_dir = IGS_DEFAULT_CONFIGS_DIR;
  app.add_option("--configs-dir", configs_dir, "directory with preset configs");

  std::string config_arg;
  igs::RunOverrides overrides;
  std::uint64_t seed_opt = 0;
  int reps_opt = 0;
  long long max_iters_opt = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_arg, "config file or preset name")->required();
  CLI::Option* seed_flag = run->add_option("--seed", seed_opt, "master seed override");
  CLI::Option* out_flag =
      run->add_option("--out", overrides.out_dir, "output directory override");
  CLI::Option* reps_flag = run->add_option("--reps", reps_opt, "repetition override");
  CLI::Option* iters_flag =
      run->add_option("--max-iters", max_iters_opt, "iteration cap override");
  run->add_option("--jobs", overrides.jobs, "parallel repetitions");

  CLI::App* presets = app.add_subcommand("presets", "list shipped preset configs");

  CLI::App* coh = app.add_subcommand("coherence", "print the coherence report");
  std::string coh_arg;
  coh->add_option("config", coh_arg, "config file or preset name")->required();

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  verify->add_option("suite", suite,
                     "gradients | brackets | balance | noise-bound | all")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (*seed_flag) overrides.seed = seed_opt;
      if (*reps_flag) overrides.reps = reps_opt;
      if (*iters_flag) overrides.max_iters = static_cast<igs::Index>(max_iters_opt);
      (void)out_flag;
      return cmd_run(config_arg, configs_dir, overrides);
    }
    if (presets->parsed()) return cmd_presets(configs_dir);
    if (coh->parsed()) return cmd_coherence(coh_arg, configs_dir);
    if (verify->parsed()) return cmd_verify(suite);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return igs::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return igs::kExitDivergence;
  }
  return igs::kExitOk;
}
