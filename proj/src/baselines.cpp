#include "igs/baselines.hpp"

#include <cmath>

#include "igs/rng.hpp"

namespace igs {

GradientPair hadamard_gradients(const HadamardParams& params, const MatrixXd& X,
                                const VectorXd& y) {
  const VectorXd r = y - X * params.predictor();
  const VectorXd g = (X.transpose() * r) / static_cast<double>(X.rows());
  GradientPair out;
  out.grad_u = -2.0 * g.cwiseProduct(params.u);
  out.grad_v = 2.0 * g.cwiseProduct(params.v);
  return out;
}

BaselineResult run_hadamard(const Problem& problem, const HadamardConfig& config) {
  if (config.alpha < 0) throw std::invalid_argument("run_hadamard: alpha must be >= 0");
  const Index p = problem.p();
  const bool holdout = config.stop_rule == StopRule::HoldoutLoss;

  MatrixXd X_train = problem.X;
  VectorXd y_train = problem.y;
  MatrixXd X_val;
  VectorXd y_val;
  if (holdout) {
    const Index n = problem.n();
    Index n_val =
        std::max<Index>(1, static_cast<Index>(std::lround(config.holdout_fraction *
                                                          static_cast<double>(n))));
    n_val = std::min(n_val, n - 1);
    Rng rng(config.seed + seed_offset::kHoldout);
    const auto perm = rng.permutation(n);
    X_train.resize(n - n_val, p);
    y_train.resize(n - n_val);
    X_val.resize(n_val, p);
    y_val.resize(n_val);
    for (Index k = 0; k < n - n_val; ++k) {
      X_train.row(k) = problem.X.row(perm[static_cast<std::size_t>(k)]);
      y_train[k] = problem.y[perm[static_cast<std::size_t>(k)]];
    }
    for (Index k = 0; k < n_val; ++k) {
      X_val.row(k) = problem.X.row(perm[static_cast<std::size_t>(n - n_val + k)]);
      y_val[k] = problem.y[perm[static_cast<std::size_t>(n - n_val + k)]];
    }
  }

  Problem train = problem;
  train.X = X_train;
  train.y = y_train;

  HadamardParams params{VectorXd::Constant(p, config.alpha),
                        VectorXd::Constant(p, config.alpha)};
  BaselineResult result;
  const Index record_every = std::max<Index>(1, config.record_every);

  auto make_record = [&](Index iter) {
    TrajectoryRecord rec = measure_w(params.predictor(), train, iter);
    if (holdout)
      rec.val_loss = 0.5 * (y_val - X_val * params.predictor()).squaredNorm();
    return rec;
  };

  TrajectoryRecord first = make_record(0);
  const double initial_loss = first.loss;
  double best_val = first.val_loss;
  Index best_iter = 0;
  VectorXd best_w = params.predictor();
  result.trajectory.records.push_back(std::move(first));

  Index stop_iter = config.max_iters;
  StopReason reason = StopReason::MaxIters;
  for (Index t = 0; t < config.max_iters; ++t) {
    const GradientPair grad = hadamard_gradients(params, X_train, y_train);
    params.u -= config.step * grad.grad_u;
    params.v -= config.step * grad.grad_v;
    const Index iter = t + 1;

    TrajectoryRecord rec = make_record(iter);
    if (holdout && rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best_iter = iter;
      best_w = params.predictor();
    }
    StopReason pending = reason;
    if (rec.loss > config.divergence_factor * initial_loss && rec.loss > initial_loss)
      pending = StopReason::Diverged;
    else if (holdout && iter - best_iter >= config.patience)
      pending = StopReason::HoldoutStop;
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
  result.final_w = holdout ? best_w : params.predictor();
  return result;
}

VectorXd group_soft_threshold(const VectorXd& z, const GroupPartition& part,
                              double threshold) {
  VectorXd out(z.size());
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double norm = part.seg(z, l).norm();
    const double scale = norm > 0 ? std::max(0.0, 1.0 - threshold / norm) : 0.0;
    part.seg(out, l) = scale * part.seg(z, l);
  }
  return out;
}

BaselineResult run_group_lasso_prox(const Problem& problem,
                                    const GroupLassoConfig& config) {
  if (config.lambda < 0) throw std::invalid_argument("group lasso: lambda must be >= 0");
  const GroupPartition& part = problem.partition;
  const double inv_n = 1.0 / static_cast<double>(problem.n());
  double step = config.step;
  if (step <= 0) {
    const double lip = std::pow(spectral_norm(problem.X), 2) * inv_n;
    step = lip > 0 ? 1.0 / lip : 1.0;
  }

  VectorXd w = VectorXd::Zero(problem.p());
  BaselineResult result;
  const Index record_every = std::max<Index>(1, config.record_every);
  result.trajectory.records.push_back(measure_w(w, problem, 0));

  Index stop_iter = config.max_iters;
  for (Index t = 0; t < config.max_iters; ++t) {
    const VectorXd grad = inv_n * (problem.X.transpose() * (problem.X * w - problem.y));
    const VectorXd z = w - step * grad;
    VectorXd next =
        config.lambda > 0 ? group_soft_threshold(z, part, config.lambda * step) : z;
    const double move = (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    const Index iter = t + 1;
    const bool converged = move < config.tol;
    if (iter % record_every == 0 || iter == config.max_iters || converged)
      result.trajectory.records.push_back(measure_w(w, problem, iter));
    if (converged) {
      stop_iter = iter;
      break;
    }
  }
  result.stop_iter = stop_iter;
  result.final_w = w;
  return result;
}

TunedGroupLasso tune_group_lasso(const Problem& problem, std::uint64_t seed,
                                 int n_lambdas, double holdout_fraction,
                                 Index max_iters) {
  const GroupPartition& part = problem.partition;
  const Index n = problem.n();
  Index n_val = std::max<Index>(
      1, static_cast<Index>(std::lround(holdout_fraction * static_cast<double>(n))));
  n_val = std::min(n_val, n - 1);
  Rng rng(seed + seed_offset::kHoldout);
  const auto perm = rng.permutation(n);

  Problem train = problem;
  train.X.resize(n - n_val, problem.p());
  train.y.resize(n - n_val);
  MatrixXd X_val(n_val, problem.p());
  VectorXd y_val(n_val);
  for (Index k = 0; k < n - n_val; ++k) {
    train.X.row(k) = problem.X.row(perm[static_cast<std::size_t>(k)]);
    train.y[k] = problem.y[perm[static_cast<std::size_t>(k)]];
  }
  for (Index k = 0; k < n_val; ++k) {
    X_val.row(k) = problem.X.row(perm[static_cast<std::size_t>(n - n_val + k)]);
    y_val[k] = problem.y[perm[static_cast<std::size_t>(n - n_val + k)]];
  }

  // lambda_max: smallest penalty whose solution from w = 0 stays at zero.
  const VectorXd corr = (train.X.transpose() * train.y) /
                        static_cast<double>(train.X.rows());
  double lambda_max = 0;
  for (Index l = 0; l < part.num_groups(); ++l)
    lambda_max = std::max(lambda_max, part.seg(corr, l).norm());
  if (lambda_max <= 0) lambda_max = 1.0;

  TunedGroupLasso tuned;
  double best_val = std::numeric_limits<double>::infinity();
  const double ratio = 1e-3;
  for (int k = 0; k < n_lambdas; ++k) {
    const double frac = n_lambdas == 1
                            ? 1.0
                            : static_cast<double>(k) / static_cast<double>(n_lambdas - 1);
    const double lambda = lambda_max * std::pow(ratio, frac);
    GroupLassoConfig cfg;
    cfg.lambda = lambda;
    cfg.max_iters = max_iters;
    cfg.record_every = max_iters;  // path runs only need the endpoint
    const BaselineResult fit = run_group_lasso_prox(train, cfg);
    const double val_mse =
        (y_val - X_val * fit.final_w).squaredNorm() / static_cast<double>(n_val);
    if (val_mse < best_val) {
      best_val = val_mse;
      tuned.best_lambda = lambda;
    }
  }

  GroupLassoConfig cfg;
  cfg.lambda = tuned.best_lambda;
  cfg.max_iters = max_iters;
  tuned.result = run_group_lasso_prox(problem, cfg);
  return tuned;
}

}  // namespace igs
