#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igs/baselines.hpp"
#include "igs/flow.hpp"
#include "igs/optimizer.hpp"

namespace igs {

enum class Algorithm { Alg1, Alg2, Flow, Hadamard, GroupLasso };

struct ProblemSpec {
  Index n = 0;
  // Either uniform (group_count x group_size) or explicit sizes.
  std::optional<Index> group_count;
  std::optional<Index> group_size;
  std::optional<std::vector<Index>> group_sizes;
  std::vector<Index> support;
  std::optional<double> fill_value;        // constant entries on the support
  std::optional<std::vector<double>> entries;  // or explicit per-coordinate values
  double sigma = 0;
  std::string design = "rademacher";  // rademacher | gaussian | orthogonal
  std::uint64_t seed = 0;
  int reps = 1;

  std::vector<Index> expanded_sizes() const;
  bool operator==(const ProblemSpec&) const = default;
};

struct SolverSpec {
  Algorithm algorithm = Algorithm::Alg1;
  // alg1 / alg2
  double alpha = 1e-6;
  double gamma = 1e-3;
  double eta = 1e-3;
  std::string v_init = "random";  // random | warm
  Index max_iters = 10000;
  std::string stop = "fixed";  // fixed | holdout | window
  int patience = 200;
  double holdout_fraction = 0.2;
  double epsilon = 1e-3;
  std::string switch_rule = "relative";  // relative | oracle (alg2 only)
  double tau = 0.01;
  double eps_small = 1e-8;
  // flow
  double theta = 1e-4;
  double dt = 1e-3;
  double t_max = 50.0;
  std::string integrator = "rk4";
  // hadamard
  double step = 1e-3;
  // group lasso
  std::optional<double> lambda;  // absent means tuned by grid search
  Index gl_max_iters = 2000;

  bool operator==(const SolverSpec&) const = default;
};

struct ExperimentConfig {
  std::string name;
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
  std::optional<std::vector<double>> sigma_grid;
  std::string out_dir = "out";
  Index record_every = 1;
  std::string notes;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse/serialize the JSON config format. Parse errors throw
/// std::invalid_argument naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Deterministic instance for repetition `rep` at the given noise level.
Problem build_problem(const ProblemSpec& spec, double sigma, int rep,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> reps;
  std::optional<Index> max_iters;
  int jobs = 1;
};

// Process exit codes used by run_experiment and the CLI.
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitVerifyFailure = 3;

/// Run all repetitions of all solvers (across the sigma grid when present),
/// writing per-repetition trajectory CSVs, aggregates, a coherence report, a
/// theoretical-bounds report when the truth is available, and a summary
/// table. Returns kExitOk or kExitDivergence; config problems throw.
int run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

std::string algorithm_name(Algorithm algo);

}  // namespace igs
