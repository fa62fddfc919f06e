#include "igs/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "igs/rng.hpp"

namespace igs {

namespace {

using nlohmann::json;

constexpr std::uint64_t kLevelStride = 7919;  // sigma-grid levels get offset seeds

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

const json& require(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) fail(ctx + "." + key, "missing");
  return j.at(key);
}

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) { ok = true; break; }
    if (!ok) fail(ctx + "." + item.key(), "unknown key");
  }
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "alg1") return Algorithm::Alg1;
  if (name == "alg2") return Algorithm::Alg2;
  if (name == "flow") return Algorithm::Flow;
  if (name == "hadamard") return Algorithm::Hadamard;
  if (name == "group_lasso") return Algorithm::GroupLasso;
  fail("solver.algorithm", "unknown algorithm '" + name + "'");
}

ProblemSpec parse_problem(const json& j) {
  check_keys(j, "problem",
             {"n", "group_count", "group_size", "group_sizes", "support", "values",
              "sigma", "design", "seed", "reps"});
  ProblemSpec spec;
  spec.n = require(j, "n", "problem").get<Index>();
  if (spec.n < 1) fail("problem.n", "must be >= 1");
  if (j.contains("group_sizes")) {
    spec.group_sizes = j.at("group_sizes").get<std::vector<Index>>();
  } else {
    spec.group_count = require(j, "group_count", "problem").get<Index>();
    spec.group_size = require(j, "group_size", "problem").get<Index>();
  }
  spec.support = require(j, "support", "problem").get<std::vector<Index>>();
  const json& values = require(j, "values", "problem");
  check_keys(values, "problem.values", {"fill", "entries"});
  if (values.contains("fill") == values.contains("entries"))
    fail("problem.values", "give exactly one of 'fill' or 'entries'");
  if (values.contains("fill")) spec.fill_value = values.at("fill").get<double>();
  if (values.contains("entries"))
    spec.entries = values.at("entries").get<std::vector<double>>();
  spec.sigma = require(j, "sigma", "problem").get<double>();
  if (spec.sigma < 0) fail("problem.sigma", "must be >= 0");
  spec.design = require(j, "design", "problem").get<std::string>();
  if (spec.design != "rademacher" && spec.design != "gaussian" &&
      spec.design != "orthogonal")
    fail("problem.design", "must be rademacher | gaussian | orthogonal");
  spec.seed = require(j, "seed", "problem").get<std::uint64_t>();
  spec.reps = require(j, "reps", "problem").get<int>();
  if (spec.reps < 1) fail("problem.reps", "must be >= 1");
  return spec;
}

SolverSpec parse_solver(const json& j) {
  check_keys(j, "solver",
             {"algorithm", "alpha", "gamma", "eta", "v_init", "max_iters", "stop",
              "patience", "holdout_fraction", "epsilon", "switch", "tau",
              "eps_small", "theta", "dt", "t_max", "integrator", "step", "lambda",
              "gl_max_iters"});
  SolverSpec s;
  s.algorithm = parse_algorithm(require(j, "algorithm", "solver").get<std::string>());
  if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
  if (s.alpha <= 0 && s.algorithm != Algorithm::GroupLasso &&
      s.algorithm != Algorithm::Flow && s.algorithm != Algorithm::Hadamard)
    fail("solver.alpha", "must be > 0");
  if (j.contains("gamma")) s.gamma = j.at("gamma").get<double>();
  if (s.gamma <= 0) fail("solver.gamma", "must be > 0");
  if (j.contains("eta")) s.eta = j.at("eta").get<double>();
  if (j.contains("v_init")) s.v_init = j.at("v_init").get<std::string>();
  if (s.v_init != "random" && s.v_init != "warm")
    fail("solver.v_init", "must be random | warm");
  if (j.contains("max_iters")) s.max_iters = j.at("max_iters").get<Index>();
  if (s.max_iters < 1) fail("solver.max_iters", "must be >= 1");
  if (j.contains("stop")) s.stop = j.at("stop").get<std::string>();
  if (s.stop != "fixed" && s.stop != "holdout" && s.stop != "window")
    fail("solver.stop", "must be fixed | holdout | window");
  if (j.contains("patience")) s.patience = j.at("patience").get<int>();
  if (j.contains("holdout_fraction"))
    s.holdout_fraction = j.at("holdout_fraction").get<double>();
  if (s.holdout_fraction <= 0 || s.holdout_fraction >= 1)
    fail("solver.holdout_fraction", "must be in (0, 1)");
  if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
  if (j.contains("switch")) s.switch_rule = j.at("switch").get<std::string>();
  if (s.switch_rule != "relative" && s.switch_rule != "oracle")
    fail("solver.switch", "must be relative | oracle");
  if (j.contains("tau")) s.tau = j.at("tau").get<double>();
  if (s.tau <= 0) fail("solver.tau", "must be > 0");
  if (j.contains("eps_small")) s.eps_small = j.at("eps_small").get<double>();
  if (s.eps_small <= 0) fail("solver.eps_small", "must be > 0");
  if (j.contains("theta")) s.theta = j.at("theta").get<double>();
  if (j.contains("dt")) s.dt = j.at("dt").get<double>();
  if (j.contains("t_max")) s.t_max = j.at("t_max").get<double>();
  if (j.contains("integrator")) s.integrator = j.at("integrator").get<std::string>();
  if (s.integrator != "rk4" && s.integrator != "euler")
    fail("solver.integrator", "must be rk4 | euler");
  if (j.contains("step")) s.step = j.at("step").get<double>();
  if (j.contains("lambda")) s.lambda = j.at("lambda").get<double>();
  if (j.contains("gl_max_iters")) s.gl_max_iters = j.at("gl_max_iters").get<Index>();
  return s;
}

json solver_to_json(const SolverSpec& s) {
  json j;
  j["algorithm"] = algorithm_name(s.algorithm);
  switch (s.algorithm) {
    case Algorithm::Alg1:
    case Algorithm::Alg2:
      j["alpha"] = s.alpha;
      j["gamma"] = s.gamma;
      j["eta"] = s.eta;
      j["v_init"] = s.v_init;
      j["max_iters"] = s.max_iters;
      j["stop"] = s.stop;
      j["patience"] = s.patience;
      j["holdout_fraction"] = s.holdout_fraction;
      j["epsilon"] = s.epsilon;
      if (s.algorithm == Algorithm::Alg2) {
        j["switch"] = s.switch_rule;
        j["tau"] = s.tau;
        j["eps_small"] = s.eps_small;
      }
      break;
    case Algorithm::Flow:
      j["theta"] = s.theta;
      j["dt"] = s.dt;
      j["t_max"] = s.t_max;
      j["integrator"] = s.integrator;
      break;
    case Algorithm::Hadamard:
      j["alpha"] = s.alpha;
      j["step"] = s.step;
      j["max_iters"] = s.max_iters;
      j["stop"] = s.stop;
      j["patience"] = s.patience;
      j["holdout_fraction"] = s.holdout_fraction;
      break;
    case Algorithm::GroupLasso:
      if (s.lambda) j["lambda"] = *s.lambda;
      j["gl_max_iters"] = s.gl_max_iters;
      break;
  }
  return j;
}

}  // namespace

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Alg1: return "alg1";
    case Algorithm::Alg2: return "alg2";
    case Algorithm::Flow: return "flow";
    case Algorithm::Hadamard: return "hadamard";
    case Algorithm::GroupLasso: return "group_lasso";
  }
  return "?";
}

std::vector<Index> ProblemSpec::expanded_sizes() const {
  if (group_sizes) return *group_sizes;
  if (!group_count || !group_size)
    fail("problem", "need group_sizes or group_count + group_size");
  return std::vector<Index>(static_cast<std::size_t>(*group_count), *group_size);
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"name", "problem", "solvers", "sigma_grid", "output", "notes"});
  ExperimentConfig config;
  config.name = require(j, "name", "config").get<std::string>();
  config.problem = parse_problem(require(j, "problem", "config"));
  const json& solvers = require(j, "solvers", "config");
  if (!solvers.is_array() || solvers.empty())
    fail("config.solvers", "must be a non-empty array");
  for (const auto& s : solvers) config.solvers.push_back(parse_solver(s));
  if (j.contains("sigma_grid")) {
    config.sigma_grid = j.at("sigma_grid").get<std::vector<double>>();
    if (config.sigma_grid->empty()) fail("config.sigma_grid", "must be non-empty");
  }
  const json& output = require(j, "output", "config");
  check_keys(output, "output", {"dir", "record_every"});
  config.out_dir = require(output, "dir", "output").get<std::string>();
  if (output.contains("record_every"))
    config.record_every = output.at("record_every").get<Index>();
  if (config.record_every < 1) fail("output.record_every", "must be >= 1");
  if (j.contains("notes")) config.notes = j.at("notes").get<std::string>();

  // Cross-field checks done once here so solvers can assume a sane problem.
  const GroupPartition part(config.problem.expanded_sizes());
  Index supported = 0;
  for (const Index l : config.problem.support) {
    if (l < 0 || l >= part.num_groups())
      fail("problem.support", "group index out of range");
    supported += part.size(l);
  }
  if (config.problem.entries &&
      static_cast<Index>(config.problem.entries->size()) != supported)
    fail("problem.values.entries", "length must match supported coordinates");
  if (config.problem.design == "orthogonal" && config.problem.n != part.dim())
    fail("problem.design", "orthogonal design needs n == p");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json j;
  j["name"] = config.name;
  json p;
  p["n"] = config.problem.n;
  if (config.problem.group_sizes) {
    p["group_sizes"] = *config.problem.group_sizes;
  } else {
    p["group_count"] = *config.problem.group_count;
    p["group_size"] = *config.problem.group_size;
  }
  p["support"] = config.problem.support;
  if (config.problem.fill_value)
    p["values"] = json{{"fill", *config.problem.fill_value}};
  else
    p["values"] = json{{"entries", *config.problem.entries}};
  p["sigma"] = config.problem.sigma;
  p["design"] = config.problem.design;
  p["seed"] = config.problem.seed;
  p["reps"] = config.problem.reps;
  j["problem"] = std::move(p);
  json solvers = json::array();
  for (const auto& s : config.solvers) solvers.push_back(solver_to_json(s));
  j["solvers"] = std::move(solvers);
  if (config.sigma_grid) j["sigma_grid"] = *config.sigma_grid;
  j["output"] = json{{"dir", config.out_dir}, {"record_every", config.record_every}};
  if (!config.notes.empty()) j["notes"] = config.notes;
  return j.dump(2) + "\n";
}

Problem build_problem(const ProblemSpec& spec, double sigma, int rep,
                      std::optional<std::uint64_t> seed_override) {
  const GroupPartition part(spec.expanded_sizes());
  const std::uint64_t base = rep_seed(seed_override.value_or(spec.seed), rep);
  MatrixXd X;
  if (spec.design == "orthogonal") {
    if (spec.n != part.dim())
      throw std::invalid_argument("orthogonal design needs n == p");
    X = orthogonal_design(part, base + seed_offset::kDesign);
  } else {
    X = generate_design(spec.n, part,
                        spec.design == "gaussian" ? DesignDist::Gaussian
                                                  : DesignDist::Rademacher,
                        base + seed_offset::kDesign);
  }
  Index supported = 0;
  for (const Index l : spec.support) supported += part.size(l);
  VectorXd values;
  if (spec.entries) {
    values = Eigen::Map<const VectorXd>(spec.entries->data(),
                                        static_cast<Index>(spec.entries->size()));
  } else {
    values = VectorXd::Constant(supported, spec.fill_value.value_or(0.0));
  }
  GroundTruth truth = generate_signal(part, spec.support, values);
  VectorXd noise = generate_noise(spec.n, sigma, base + seed_offset::kNoise);
  return observe(std::move(X), part, std::move(truth), std::move(noise), base);
}

namespace {

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    try {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < std::min(jobs, count); ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

OptimizerConfig to_optimizer_config(const SolverSpec& s, Index record_every,
                                    std::uint64_t seed_base,
                                    std::optional<Index> max_iters_override) {
  OptimizerConfig c;
  c.alpha = s.alpha;
  c.gamma = s.gamma;
  c.eta_mode = EtaMode::Adaptive;
  c.eta_constant = s.eta;
  c.v_init = s.v_init == "warm" ? VInit::WarmStart : VInit::RandomUnit;
  c.seed = seed_base;
  c.max_iters = max_iters_override.value_or(s.max_iters);
  c.record_every = record_every;
  c.stop_rule = s.stop == "holdout"  ? StopRule::HoldoutLoss
                : s.stop == "window" ? StopRule::TheoreticalWindow
                                     : StopRule::FixedIters;
  c.patience = s.patience;
  c.holdout_fraction = s.holdout_fraction;
  c.epsilon = s.epsilon;
  if (s.algorithm == Algorithm::Alg2)
    c.switch_rule = s.switch_rule == "oracle" ? SwitchRule::OracleHalfUstar
                                              : SwitchRule::RelativeChange;
  c.tau = s.tau;
  c.eps_small = s.eps_small;
  return c;
}

struct RepOutcome {
  Trajectory trajectory;
  Index stop_iter = 0;
  std::optional<Index> switch_iter;
  bool diverged = false;
  double final_l2 = std::numeric_limits<double>::quiet_NaN();
  double min_l2 = std::numeric_limits<double>::quiet_NaN();
};

RepOutcome run_one(const SolverSpec& solver, const Problem& problem,
                   Index record_every, std::optional<Index> max_iters_override) {
  RepOutcome out;
  switch (solver.algorithm) {
    case Algorithm::Alg1:
    case Algorithm::Alg2: {
      const OptimizerConfig cfg = to_optimizer_config(
          solver, record_every, problem.seed, max_iters_override);
      const RunResult run = solver.algorithm == Algorithm::Alg1
                                ? run_alg1(problem, cfg)
                                : run_alg2(problem, cfg);
      out.trajectory = run.trajectory;
      out.stop_iter = run.stop_iter;
      out.switch_iter = run.switch_iter;
      out.diverged = run.stop_reason == StopReason::Diverged;
      out.final_l2 = measure(run.final_params, problem).l2_error;
      break;
    }
    case Algorithm::Flow: {
      FlowConfig cfg;
      cfg.theta = solver.theta;
      cfg.dt = solver.dt;
      cfg.t_max = solver.t_max;
      cfg.integrator =
          solver.integrator == "euler" ? Integrator::Euler : Integrator::RK4;
      cfg.record_every = record_every;
      cfg.seed = problem.seed;
      try {
        const auto states = integrate(problem, cfg);
        for (const auto& st : states) {
          const auto step = static_cast<Index>(std::llround(st.t / cfg.dt));
          out.trajectory.records.push_back(measure(st.params, problem, step));
        }
        out.stop_iter = out.trajectory.records.back().iter;
        out.final_l2 = out.trajectory.records.back().l2_error;
      } catch (const std::runtime_error&) {
        out.diverged = true;
      }
      break;
    }
    case Algorithm::Hadamard: {
      HadamardConfig cfg;
      cfg.alpha = solver.alpha;
      cfg.step = solver.step;
      cfg.max_iters = max_iters_override.value_or(solver.max_iters);
      cfg.record_every = record_every;
      cfg.stop_rule = solver.stop == "holdout" ? StopRule::HoldoutLoss
                                               : StopRule::FixedIters;
      cfg.patience = solver.patience;
      cfg.holdout_fraction = solver.holdout_fraction;
      cfg.seed = problem.seed;
      const BaselineResult run = run_hadamard(problem, cfg);
      out.trajectory = run.trajectory;
      out.stop_iter = run.stop_iter;
      out.diverged = run.stop_reason == StopReason::Diverged;
      out.final_l2 = measure_w(run.final_w, problem).l2_error;
      break;
    }
    case Algorithm::GroupLasso: {
      const Index iters = max_iters_override.value_or(solver.gl_max_iters);
      BaselineResult run;
      if (solver.lambda) {
        GroupLassoConfig cfg;
        cfg.lambda = *solver.lambda;
        cfg.max_iters = iters;
        cfg.record_every = record_every;
        run = run_group_lasso_prox(problem, cfg);
      } else {
        TunedGroupLasso tuned =
            tune_group_lasso(problem, problem.seed, 20, 0.2, iters);
        run = std::move(tuned.result);
      }
      out.trajectory = run.trajectory;
      out.stop_iter = run.stop_iter;
      out.final_l2 = measure_w(run.final_w, problem).l2_error;
      break;
    }
  }
  if (!out.trajectory.empty() && problem.truth) {
    out.min_l2 = out.trajectory.records[out.trajectory.argmin_l2()].l2_error;
  }
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  namespace fs = std::filesystem;
  const std::string out_dir = overrides.out_dir.value_or(config.out_dir);
  fs::create_directories(out_dir);
  const std::uint64_t master = overrides.seed.value_or(config.problem.seed);
  const int reps = overrides.reps.value_or(config.problem.reps);
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  const std::vector<double> sigmas =
      config.sigma_grid ? *config.sigma_grid
                        : std::vector<double>{config.problem.sigma};

  std::ofstream summary(out_dir + "/" + config.name + "_summary.csv");
  summary << "label,sigma,rep,stop_iter,switch_iter,final_l2,min_l2\n";

  bool any_divergence = false;
  for (std::size_t level = 0; level < sigmas.size(); ++level) {
    const double sigma = sigmas[level];
    const std::uint64_t level_master = master + kLevelStride * level;
    for (std::size_t si = 0; si < config.solvers.size(); ++si) {
      const SolverSpec& solver = config.solvers[si];
      std::string label = config.name;
      if (config.solvers.size() > 1) label += "_" + algorithm_name(solver.algorithm);
      if (sigmas.size() > 1) label += "_sigma" + std::to_string(level);

      std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
      parallel_for(reps, overrides.jobs, [&](int rep) {
        const Problem problem =
            build_problem(config.problem, sigma, rep, level_master);
        outcomes[static_cast<std::size_t>(rep)] =
            run_one(solver, problem, config.record_every, overrides.max_iters);
      });

      // Reports from the first repetition's instance.
      const Problem probe = build_problem(config.problem, sigma, 0, level_master);
      {
        const CoherenceReport rep = coherence(probe.X, probe.partition);
        std::ofstream os(out_dir + "/" + label + "_coherence.txt");
        os << "delta_in " << format_double(rep.delta_in) << "\n"
           << "delta_out " << format_double(rep.delta_out) << "\n";
      }
      if (probe.truth && (solver.algorithm == Algorithm::Alg1 ||
                          solver.algorithm == Algorithm::Alg2)) {
        const double nl = probe.noise ? noise_linf(probe.X, *probe.noise) : 0.0;
        try {
          const TheoreticalBounds b = theoretical_bounds(
              *probe.truth, nl, solver.epsilon, solver.alpha, solver.gamma);
          std::ofstream os(out_dir + "/" + label + "_bounds.txt");
          os << "zeta " << format_double(b.zeta) << "\n"
             << "t_lb " << format_double(b.t_lb) << "\n"
             << "t_ub " << format_double(b.t_ub) << "\n"
             << "vacuous " << (b.vacuous ? 1 : 0) << "\n"
             << "noise_linf " << format_double(nl) << "\n";
        } catch (const std::invalid_argument&) {
          // empty support: no bounds to report
        }
      }

      std::vector<Trajectory> trajectories;
      trajectories.reserve(outcomes.size());
      const std::vector<Index> support =
          probe.truth ? probe.truth->support : std::vector<Index>{};
      for (int rep = 0; rep < reps; ++rep) {
        const RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
        any_divergence |= out.diverged;
        if (!out.trajectory.empty()) {
          write_trajectory_csv(
              out_dir + "/" + label + "_rep" + std::to_string(rep) + ".csv",
              out.trajectory, support);
          trajectories.push_back(out.trajectory);
        }
        summary << label << ',' << format_double(sigma) << ',' << rep << ','
                << out.stop_iter << ','
                << (out.switch_iter ? std::to_string(*out.switch_iter) : "-1")
                << ',' << format_double(out.final_l2) << ','
                << format_double(out.min_l2) << '\n';
      }
      if (!trajectories.empty() && probe.truth)
        write_aggregate_csv(out_dir + "/" + label + "_aggregate.csv",
                            aggregate(trajectories));
    }
  }
  return any_divergence ? kExitDivergence : kExitOk;
}

}  // namespace igs
