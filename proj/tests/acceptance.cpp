// Acceptance harness: runs every headline claim end to end and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "igs/experiment.hpp"
#include "igs/flow.hpp"
#include "igs/rng.hpp"
#include "igs/verification.hpp"

using namespace igs;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool passed,
            const std::string& detail) {
  std::printf("[%s] C%02d %-24s %s\n", passed ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

void parallel_reps(int count, const std::function<void(int)>& body) {
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
  };
  std::thread other(worker);
  worker();
  other.join();
}

OptimizerConfig optimizer_config(const SolverSpec& s, std::uint64_t seed,
                                 Index record_every = 1) {
  OptimizerConfig c;
  c.alpha = s.alpha;
  c.gamma = s.gamma;
  c.eta_constant = s.eta;
  c.v_init = s.v_init == "warm" ? VInit::WarmStart : VInit::RandomUnit;
  c.seed = seed;
  c.max_iters = s.max_iters;
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

ExperimentConfig preset(const std::string& name) {
  return load_config(std::string(IGS_CONFIGS_DIR) + "/" + name + ".json");
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------------------

struct Fig2Results {
  std::vector<RunResult> runs;
  std::vector<std::optional<Problem>> problems;
  double seconds = 0;
};

Fig2Results run_fig2_batch() {
  const ExperimentConfig config = preset("fig2");
  const SolverSpec& solver = config.solvers.front();
  const int reps = config.problem.reps;
  Fig2Results out;
  out.runs.resize(reps);
  out.problems.resize(reps);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_reps(reps, [&](int rep) {
    Problem prob = build_problem(config.problem, config.problem.sigma, rep);
    out.runs[rep] = run_alg1(prob, optimizer_config(solver, prob.seed));
    out.problems[rep] = std::move(prob);
  });
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void criterion_1(const Fig2Results& fig2, double err2_bound, double alpha) {
  int err_hits = 0, joint_hits = 0;
  for (std::size_t rep = 0; rep < fig2.runs.size(); ++rep) {
    bool err_hit = false, joint = false;
    for (const auto& rec : fig2.runs[rep].trajectory.records) {
      if (rec.l2_error * rec.l2_error <= err2_bound) {
        err_hit = true;
        if (rec.linf_off <= 10.0 * alpha) joint = true;
      }
    }
    err_hits += err_hit;
    joint_hits += joint;
  }
  const bool pass = joint_hits >= 27 && fig2.seconds <= 120.0;
  report(1, "fig2-replication", pass,
         "iterate with err^2<=" + fmt(err2_bound) + " and off-support<=10a: " +
             std::to_string(joint_hits) + "/30 (err-only " +
             std::to_string(err_hits) + "/30, need >=27), runtime " +
             fmt(fig2.seconds) + "s of 120s");
}

void criterion_2() {
  const ExperimentConfig config = preset("fig3");
  const SolverSpec& solver = config.solvers.front();
  const int reps = config.problem.reps;
  const double tol_scale =
      3.0 * config.problem.sigma *
      std::sqrt(std::log(300.0) / static_cast<double>(config.problem.n));
  std::vector<int> mag_ok(reps), align_ok(reps), order_ok(reps);
  parallel_reps(reps, [&](int rep) {
    Problem prob = build_problem(config.problem, config.problem.sigma, rep);
    RunResult res = run_alg2(prob, optimizer_config(solver, prob.seed));
    const GroundTruth& truth = *prob.truth;
    const TrajectoryRecord rec = measure(res.final_params, prob);
    bool mags = true, aligns = true;
    for (Index k = 0; k < truth.s(); ++k) {
      const Index l = truth.support[static_cast<std::size_t>(k)];
      const double wstar = truth.u_star[l] * truth.u_star[l];
      if (std::abs(rec.group_magnitudes[l] - wstar) > tol_scale * truth.u_star[l])
        mags = false;
      if (rec.alignments[k] < 0.99) aligns = false;
    }
    std::vector<double> cross(static_cast<std::size_t>(truth.s()), -1.0);
    for (const auto& r : res.trajectory.records)
      for (Index k = 0; k < truth.s(); ++k) {
        const Index l = truth.support[static_cast<std::size_t>(k)];
        if (cross[static_cast<std::size_t>(k)] < 0 &&
            r.group_magnitudes[l] >= 0.5 * truth.u_star[l] * truth.u_star[l])
          cross[static_cast<std::size_t>(k)] = static_cast<double>(r.iter);
    }
    bool order = true;  // larger u* must cross half its square earlier
    for (std::size_t k = 0; k + 1 < cross.size(); ++k)
      if (!(cross[k] > cross[k + 1] && cross[k + 1] > 0)) order = false;
    mag_ok[rep] = mags;
    align_ok[rep] = aligns;
    order_ok[rep] = order;
  });
  const int mags = std::accumulate(mag_ok.begin(), mag_ok.end(), 0);
  const int aligns = std::accumulate(align_ok.begin(), align_ok.end(), 0);
  const int orders = std::accumulate(order_ok.begin(), order_ok.end(), 0);
  const bool pass = mags == reps && aligns == reps && orders >= 27;
  report(2, "fig3-incremental", pass,
         "magnitudes " + std::to_string(mags) + "/30, alignments " +
             std::to_string(aligns) + "/30, ordering " + std::to_string(orders) +
             "/30 (need 30/30/>=27)");
}

void criterion_3() {
  const ExperimentConfig config = preset("fig4");
  const SolverSpec& alg2 = config.solvers.at(0);
  const SolverSpec& hadamard = config.solvers.at(1);
  const int reps = config.problem.reps;
  std::vector<int> contrast(reps);
  parallel_reps(reps, [&](int rep) {
    Problem prob = build_problem(config.problem, config.problem.sigma, rep);
    RunResult res = run_alg2(prob, optimizer_config(alg2, prob.seed, 5));
    const double grouped =
        res.trajectory.records[res.trajectory.argmin_l2()].l2_error;
    HadamardConfig hcfg;
    hcfg.alpha = hadamard.alpha;
    hcfg.step = hadamard.step;
    hcfg.max_iters = hadamard.max_iters;
    hcfg.record_every = 5;
    hcfg.seed = prob.seed;
    BaselineResult hres = run_hadamard(prob, hcfg);
    const double elementwise =
        hres.trajectory.records[hres.trajectory.argmin_l2()].l2_error;
    contrast[rep] = grouped < 0.5 && elementwise > 1.0;
  });
  const int hits = std::accumulate(contrast.begin(), contrast.end(), 0);
  report(3, "fig4-phase-contrast", hits >= 9,
         "grouped<0.5 and elementwise>1.0 in " + std::to_string(hits) +
             "/10 seeds (need >=9)");
}

void criterion_4() {
  const ExperimentConfig config = preset("fig5");
  const SolverSpec& solver = config.solvers.front();
  const int reps = config.problem.reps;
  std::vector<double> final_log(reps);
  std::vector<Trajectory> trajectories(reps);
  parallel_reps(reps, [&](int rep) {
    Problem prob = build_problem(config.problem, config.problem.sigma, rep);
    RunResult res = run_alg1(prob, optimizer_config(solver, prob.seed, 5));
    final_log[rep] = log_error(measure(res.final_params, prob).l2_error);
    trajectories[rep] = std::move(res.trajectory);
  });
  const double mean_log =
      std::accumulate(final_log.begin(), final_log.end(), 0.0) / reps;
  const AggregateSummary agg = aggregate(trajectories);
  bool ordered = true;
  for (std::size_t k = 0; k < agg.iters.size(); ++k)
    if (agg.quantiles(0, static_cast<Index>(k)) >
            agg.quantiles(1, static_cast<Index>(k)) ||
        agg.quantiles(1, static_cast<Index>(k)) >
            agg.quantiles(2, static_cast<Index>(k)))
      ordered = false;
  const bool pass = mean_log < std::log(0.3) && ordered;
  report(4, "fig5-degenerate", pass,
         "mean log l2 at stopping " + fmt(mean_log) + " vs " +
             fmt(std::log(0.3)) + ", bands " + (ordered ? "ordered" : "CROSSED"));
}

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const CheckResult res = check_gradients(100, 20240);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(5, "gradient-correctness", res.passed && secs < 5.0,
         res.detail + ", runtime " + fmt(secs) + "s of 5s");
}

void criterion_6() {
  const BalanceCheck res = check_balance(4242);
  report(6, "balance-conservation", res.result.passed, res.result.detail);
}

void criterion_7() {
  Rng rng(31337);
  int checked = 0, violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    const Index L = 4 + static_cast<Index>(rng.uniform() * 5);
    const Index gs = 2 + static_cast<Index>(rng.uniform() * 3);
    const Index n = 150 + static_cast<Index>(rng.uniform() * 1850);
    GroupPartition part = GroupPartition::uniform(L, gs);
    const Index s = 1 + static_cast<Index>(rng.uniform() * (L - 1));
    std::vector<Index> support;
    for (Index l = 0; l < s; ++l) support.push_back(l);
    const double value = 3.0 + rng.uniform() * 7.0;
    const std::uint64_t seed = 50000 + static_cast<std::uint64_t>(k);
    MatrixXd X = generate_design(n, part, DesignDist::Rademacher, seed);
    GroundTruth truth =
        generate_signal(part, support, VectorXd::Constant(s * gs, value));
    VectorXd xi = generate_noise(n, 0.5, seed + 1);
    Problem prob = observe(std::move(X), part, std::move(truth), xi, seed);

    const CoherenceReport rep = coherence(prob.X, part);
    OptimizerConfig cfg;
    cfg.v_init = VInit::WarmStart;
    cfg.seed = seed;
    const GroupedParams st = init_state(cfg, prob);
    for (const Index l : prob.truth->support) {
      const double align =
          part.seg(st.v, l).dot(part.seg(prob.truth->v_star, l));
      const double noise_l =
          (part.block(prob.X, l).transpose() * xi).norm() / static_cast<double>(n);
      const double u2 = prob.truth->u_star[l] * prob.truth->u_star[l];
      const double term = rep.delta_in + static_cast<double>(L) * rep.delta_out +
                          noise_l / u2;
      const double bound = 1.0 - term * term;
      ++checked;
      worst_margin = std::min(worst_margin, align - bound);
      if (align < bound) ++violations;
    }
  }
  report(7, "warm-start-alignment", violations == 0,
         std::to_string(checked) + " supported groups over 50 problems, " +
             std::to_string(violations) + " bound violations, worst margin " +
             fmt(worst_margin));
}

void criterion_8() {
  GroupPartition part = GroupPartition::uniform(4, 3);
  MatrixXd X = orthogonal_design(part, 99);
  GroundTruth truth = generate_signal(part, {0, 2}, VectorXd::Constant(6, 10.0));
  Problem prob = observe(std::move(X), part, std::move(truth),
                         VectorXd::Zero(part.dim()), 99);
  FlowConfig cfg;
  cfg.theta = 1e-4;
  cfg.dt = 1e-3;
  cfg.t_max = 600.0;
  cfg.record_every = 100;
  const auto states = integrate(prob, cfg);
  const double off_cap = 100.0 * std::pow(cfg.theta, 1.5);
  bool window = false;
  double best_on = std::numeric_limits<double>::infinity(), off_at_best = 0;
  for (const FlowState& s : states) {
    const VectorXd w = predictor(s.params, prob.partition);
    double on = 0, off = 0;
    for (Index l = 0; l < prob.partition.num_groups(); ++l) {
      const double e = prob.partition.seg((w - prob.truth->w_star).eval(), l)
                           .cwiseAbs()
                           .maxCoeff();
      double& slot = prob.truth->on_support(l) ? on : off;
      slot = std::max(slot, e);
    }
    if (on < best_on) {
      best_on = on;
      off_at_best = off;
    }
    if (on <= 1e-3 && off <= off_cap) window = true;
  }
  report(8, "flow-stopping-window", window,
         "best on-support linf " + fmt(best_on) + " (cap 1e-3), off there " +
             fmt(off_at_best) + " (cap " + fmt(off_cap) + ")");
}

void criterion_9() {
  const CheckResult res = check_brackets(50, 777);
  report(9, "bracket-calculus", res.passed, res.detail);
}

void criterion_10() {
  const NoiseBoundCheck res = check_noise_bound(2000, 100, 50, 1.0, 2025);
  report(10, "noise-bound-mc", res.result.passed, res.result.detail);
}

void criterion_11(const Fig2Results& fig2, double err2_bound) {
  const ExperimentConfig config = preset("fig2");
  const SolverSpec& solver = config.solvers.front();
  const Problem& probe = *fig2.problems.front();
  const double nl = noise_linf(probe.X, *probe.noise);
  const TheoreticalBounds bounds = theoretical_bounds(
      *probe.truth, nl, solver.epsilon, solver.alpha, solver.gamma);
  const auto mid = static_cast<Index>(std::lround(0.5 * (bounds.t_lb + bounds.t_ub)));
  int mid_ok = 0;
  for (const auto& run : fig2.runs) {
    for (const auto& rec : run.trajectory.records)
      if (rec.iter == mid && rec.l2_error * rec.l2_error <= err2_bound) {
        ++mid_ok;
        break;
      }
  }
  const bool ordered = bounds.t_lb < bounds.t_ub;
  const bool pass = ordered && mid_ok >= 27;
  report(11, "theorem4-window", pass,
         "T_lb " + fmt(bounds.t_lb) + (ordered ? " < " : " >= ") + "T_ub " +
             fmt(bounds.t_ub) + " (zeta " + fmt(bounds.zeta) +
             "); midpoint iterate " + std::to_string(mid) +
             " meets the error bound in " + std::to_string(mid_ok) + "/30");
}

void criterion_12() {
  const std::vector<std::string> names = {"fig2", "fig3",        "fig4",
                                          "fig5", "flow_window", "snr_sweep"};
  const fs::path base = fs::temp_directory_path() / "igs_acceptance_det";
  fs::remove_all(base);
  bool all_identical = true;
  std::string detail;
  for (const std::string& name : names) {
    const ExperimentConfig config = preset(name);
    for (int pass = 0; pass < 2; ++pass) {
      RunOverrides ov;
      ov.out_dir = (base / (name + "_" + std::to_string(pass))).string();
      ov.reps = 2;
      ov.max_iters = 300;
      ov.jobs = pass + 1;  // byte-identical regardless of worker count
      run_experiment(config, ov);
    }
    const fs::path a = base / (name + "_0");
    const fs::path b = base / (name + "_1");
    for (const auto& entry : fs::directory_iterator(a)) {
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(b / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      if (!fb || sa.str() != sb.str()) {
        all_identical = false;
        detail += entry.path().filename().string() + " differs; ";
      }
    }
  }
  fs::remove_all(base);
  report(12, "preset-determinism", all_identical,
         all_identical ? "all preset reruns byte-identical (6 presets)" : detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  const ExperimentConfig fig2_config = preset("fig2");
  const double p = static_cast<double>(GroupPartition(fig2_config.problem.expanded_sizes()).dim());
  const double err2_bound = 20.0 * 3.0 * fig2_config.problem.sigma *
                            fig2_config.problem.sigma * std::log(p) /
                            static_cast<double>(fig2_config.problem.n);

  const Fig2Results fig2 = run_fig2_batch();
  criterion_1(fig2, err2_bound, fig2_config.solvers.front().alpha);
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11(fig2, err2_bound);
  criterion_12();

  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
