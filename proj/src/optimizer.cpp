#include "igs/optimizer.hpp"

#include <cmath>

#include "igs/rng.hpp"

namespace igs {

namespace {

constexpr double kEpsU = 1e-12;  // adaptive eta is clamped at 1/kEpsU^4

// Direction update factor eta_l * u_l^2 in the overflow-safe form. For
// |u| >= kEpsU this is exactly 1/u^2; below, the clamped eta keeps it finite.
double adaptive_direction_factor(double u) {
  const double u2 = u * u;
  if (u2 >= kEpsU * kEpsU) return 1.0 / u2;
  return u2 / (kEpsU * kEpsU * kEpsU * kEpsU);
}

GroupedParams step_impl(const GroupedParams& state, const MatrixXd& X,
                        const VectorXd& y, const GroupPartition& part,
                        double gamma, double eta_constant, EtaMode mode,
                        bool* degenerate) {
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  GroupedParams next;
  next.u.resize(part.num_groups());
  next.v.resize(part.dim());

  // Direction pass at (u(t), v(t)).
  VectorXd w(part.dim());
  for (Index l = 0; l < part.num_groups(); ++l)
    part.seg(w, l) = (state.u[l] * state.u[l]) * part.seg(state.v, l);
  const VectorXd g = inv_n * (X.transpose() * (y - X * w));
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double ul = state.u[l];
    if (mode == EtaMode::Adaptive && ul == 0.0) {
      part.seg(next.v, l) = part.seg(state.v, l);  // group frozen for the step
      continue;
    }
    const double factor = mode == EtaMode::Adaptive
                              ? adaptive_direction_factor(ul)
                              : eta_constant * ul * ul;
    VectorXd z = part.seg(state.v, l) + factor * part.seg(g, l);
    const double norm = z.norm();
    if (norm == 0.0) {
      part.seg(next.v, l) = part.seg(state.v, l);
      if (degenerate) *degenerate = true;
    } else {
      part.seg(next.v, l) = z / norm;
    }
  }

  // Magnitude pass at (u(t), v(t+1)): the residual sees the updated directions.
  for (Index l = 0; l < part.num_groups(); ++l)
    part.seg(w, l) = (state.u[l] * state.u[l]) * part.seg(next.v, l);
  const VectorXd g2 = inv_n * (X.transpose() * (y - X * w));
  for (Index l = 0; l < part.num_groups(); ++l)
    next.u[l] = state.u[l] +
                2.0 * gamma * state.u[l] * part.seg(next.v, l).dot(part.seg(g2, l));
  return next;
}

struct HoldoutSplit {
  MatrixXd X_train, X_val;
  VectorXd y_train, y_val;
};

HoldoutSplit make_holdout(const Problem& problem, double fraction,
                          std::uint64_t seed) {
  const Index n = problem.n();
  Index n_val = static_cast<Index>(std::lround(fraction * static_cast<double>(n)));
  n_val = std::max<Index>(1, std::min(n_val, n - 1));
  Rng rng(seed + seed_offset::kHoldout);
  const auto perm = rng.permutation(n);
  HoldoutSplit split;
  split.X_train.resize(n - n_val, problem.p());
  split.y_train.resize(n - n_val);
  split.X_val.resize(n_val, problem.p());
  split.y_val.resize(n_val);
  for (Index k = 0; k < n - n_val; ++k) {
    split.X_train.row(k) = problem.X.row(perm[static_cast<std::size_t>(k)]);
    split.y_train[k] = problem.y[perm[static_cast<std::size_t>(k)]];
  }
  for (Index k = 0; k < n_val; ++k) {
    const Index row = perm[static_cast<std::size_t>(n - n_val + k)];
    split.X_val.row(k) = problem.X.row(row);
    split.y_val[k] = problem.y[row];
  }
  return split;
}

RunResult run_impl(const Problem& problem, const OptimizerConfig& config,
                   bool allow_switch) {
  const GroupPartition& part = problem.partition;
  const SwitchRule switch_rule = allow_switch ? config.switch_rule : SwitchRule::None;
  if (switch_rule == SwitchRule::OracleHalfUstar && !problem.truth)
    throw std::invalid_argument("oracle switch rule needs ground truth");

  // The training view: either the full problem or the holdout complement.
  const bool holdout = config.stop_rule == StopRule::HoldoutLoss;
  Problem train = problem;
  std::optional<HoldoutSplit> split;
  if (holdout) {
    split = make_holdout(problem, config.holdout_fraction, config.seed);
    train.X = split->X_train;
    train.y = split->y_train;
    train.noise.reset();
  }

  Index window_stop = -1;
  if (config.stop_rule == StopRule::TheoreticalWindow) {
    if (!problem.truth)
      throw std::invalid_argument("theoretical window stopping needs ground truth");
    const double nl = problem.noise ? noise_linf(problem.X, *problem.noise) : 0.0;
    const TheoreticalBounds bounds =
        theoretical_bounds(*problem.truth, nl, config.epsilon, config.alpha, config.gamma);
    window_stop = static_cast<Index>(std::lround(0.5 * (bounds.t_lb + bounds.t_ub)));
    window_stop = std::max<Index>(1, std::min(window_stop, config.max_iters));
  }

  const FinalSelection selection = config.final_selection.value_or(
      holdout ? FinalSelection::BestValidation : FinalSelection::AtStop);

  RunResult result;
  GroupedParams state = init_state(config, train);

  auto record = [&](const GroupedParams& s, Index iter) {
    TrajectoryRecord rec = measure(s, train, iter);
    if (holdout) {
      const VectorXd w = predictor(s, part);
      rec.val_loss = 0.5 * (split->y_val - split->X_val * w).squaredNorm();
    }
    result.trajectory.records.push_back(std::move(rec));
    return result.trajectory.records.back();
  };

  TrajectoryRecord first = record(state, 0);
  const double initial_loss = first.loss;
  double best_val = first.val_loss;
  Index best_iter = 0;
  GroupedParams best_params = state;

  EtaMode mode = config.eta_mode;
  Index stop_iter = config.max_iters;
  StopReason reason = StopReason::MaxIters;

  const Index record_every = std::max<Index>(1, config.record_every);
  for (Index t = 0; t < config.max_iters; ++t) {
    bool degenerate = false;
    GroupedParams next =
        step_impl(state, train.X, train.y, part, config.gamma, config.eta_constant,
                  mode, &degenerate);
    result.direction_degeneracy |= degenerate;
    const Index iter = t + 1;

    if (!result.switch_iter && switch_rule != SwitchRule::None) {
      const bool fire =
          switch_rule == SwitchRule::RelativeChange
              ? switch_criterion_relative(state.u, next.u, config.tau, config.eps_small)
              : switch_criterion_oracle(next, *problem.truth);
      if (fire) {
        result.switch_iter = iter;
        mode = EtaMode::Constant;
      }
    }
    state = std::move(next);

    TrajectoryRecord rec = measure(state, train, iter);
    if (holdout) {
      const VectorXd w = predictor(state, part);
      rec.val_loss = 0.5 * (split->y_val - split->X_val * w).squaredNorm();
      if (rec.val_loss < best_val) {
        best_val = rec.val_loss;
        best_iter = iter;
        best_params = state;
      }
    }

    StopReason pending = reason;
    if (rec.loss > config.divergence_factor * initial_loss && rec.loss > initial_loss)
      pending = StopReason::Diverged;
    else if (holdout && iter - best_iter >= config.patience)
      pending = StopReason::HoldoutStop;
    else if (window_stop > 0 && iter == window_stop)
      pending = StopReason::WindowStop;
    const bool stopping = pending != StopReason::MaxIters;

    if (iter % record_every == 0 || iter == config.max_iters || stopping)
      result.trajectory.records.push_back(std::move(rec));
    if (stopping) {
      stop_iter = iter;
      reason = pending;
      break;
    }
  }

  result.stop_iter = stop_iter;
  result.stop_reason = reason;
  if (holdout) result.best_val_iter = best_iter;
  result.final_params =
      selection == FinalSelection::BestValidation && holdout ? best_params : state;
  return result;
}

}  // namespace

GroupedParams init_state(const OptimizerConfig& config, const Problem& problem) {
  const GroupPartition& part = problem.partition;
  GroupedParams state;
  state.u = VectorXd::Constant(part.num_groups(), config.alpha);
  state.v.resize(part.dim());
  Rng rng(config.seed + seed_offset::kInit);
  if (config.v_init == VInit::RandomUnit) {
    for (Index l = 0; l < part.num_groups(); ++l)
      part.seg(state.v, l) = rng.unit_sphere(part.size(l));
    return state;
  }
  const VectorXd g =
      (problem.X.transpose() * problem.y) / static_cast<double>(problem.n());
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double norm = part.seg(g, l).norm();
    if (norm > 0)
      part.seg(state.v, l) = part.seg(g, l) / norm;
    else
      part.seg(state.v, l) = rng.unit_sphere(part.size(l));
  }
  return state;
}

GroupedParams step_alg1(const GroupedParams& state, const Problem& problem,
                        const OptimizerConfig& config, EtaMode mode,
                        bool* degenerate) {
  return step_impl(state, problem.X, problem.y, problem.partition, config.gamma,
                   config.eta_constant, mode, degenerate);
}

RunResult run_alg1(const Problem& problem, const OptimizerConfig& config) {
  return run_impl(problem, config, /*allow_switch=*/false);
}

RunResult run_alg2(const Problem& problem, const OptimizerConfig& config) {
  if (config.switch_rule == SwitchRule::None)
    throw std::invalid_argument("run_alg2: a switch rule is required");
  return run_impl(problem, config, /*allow_switch=*/true);
}

TheoreticalBounds theoretical_bounds(const GroundTruth& truth, double noise_linf,
                                     double epsilon, double alpha, double gamma) {
  if (truth.support.empty())
    throw std::invalid_argument("theoretical_bounds: empty support");
  if (alpha <= 0 || gamma <= 0)
    throw std::invalid_argument("theoretical_bounds: alpha and gamma must be > 0");
  const double level = std::max(noise_linf, epsilon);
  if (level <= 0)
    throw std::invalid_argument("theoretical_bounds: need noise_linf or epsilon > 0");
  TheoreticalBounds b;
  b.zeta = 80.0 * level;
  const double umax = truth.u_star_max();
  const double umax2 = umax * umax;
  const double umin = truth.u_star_min();
  const double umin2 = umin * umin;
  const double zl = std::max(b.zeta, umin2);
  b.t_lb = std::log(umax2 / (2.0 * alpha * alpha)) /
               (2.0 * std::log1p(0.5 * gamma * zl)) +
           std::floor(std::log2(umax2 / b.zeta)) * 5.0 / (2.0 * gamma * zl);
  b.t_ub = 5.0 / (16.0 * gamma * zl) * std::log(1.0 / std::pow(alpha, 4));
  b.vacuous = b.zeta >= umax2;
  return b;
}

bool switch_criterion_relative(const VectorXd& u_prev, const VectorXd& u_next,
                               double tau, double eps_small) {
  if (u_prev.size() != u_next.size())
    throw std::invalid_argument("switch_criterion_relative: length mismatch");
  double worst = 0;
  for (Index l = 0; l < u_prev.size(); ++l)
    worst = std::max(worst,
                     std::abs(u_next[l] - u_prev[l]) / std::abs(u_prev[l] + eps_small));
  return worst < tau;
}

bool switch_criterion_oracle(const GroupedParams& state, const GroundTruth& truth) {
  for (const Index l : truth.support)
    if (state.u[l] * state.u[l] < 0.5 * truth.u_star[l] * truth.u_star[l])
      return false;
  return true;
}

}  // namespace igs
