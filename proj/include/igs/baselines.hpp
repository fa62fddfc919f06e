#pragma once

#include "igs/metrics.hpp"
#include "igs/optimizer.hpp"

namespace igs {

/// Elementwise reparameterization w = u^2 - v^2, the unstructured-sparsity
/// reference trained by plain gradient descent.
struct HadamardParams {
  VectorXd u;
  VectorXd v;

  VectorXd predictor() const { return u.array().square() - v.array().square(); }
};

struct BaselineResult {
  VectorXd final_w;
  Trajectory trajectory;
  Index stop_iter = 0;
  StopReason stop_reason = StopReason::MaxIters;
};

struct HadamardConfig {
  double alpha = 1e-6;
  double step = 1e-3;
  Index max_iters = 20000;
  Index record_every = 1;
  StopRule stop_rule = StopRule::FixedIters;  // FixedIters or HoldoutLoss
  int patience = 200;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
  double divergence_factor = 1e3;
};

/// Gradient of the sample-averaged squared loss in the Hadamard
/// parameterization (used by the descent loop and checked against finite
/// differences in the tests).
GradientPair hadamard_gradients(const HadamardParams& params, const MatrixXd& X,
                                const VectorXd& y);

BaselineResult run_hadamard(const Problem& problem, const HadamardConfig& config);

/// Group-wise soft threshold: w_l <- max(0, 1 - t / ||w_l||) w_l.
VectorXd group_soft_threshold(const VectorXd& z, const GroupPartition& part,
                              double threshold);

struct GroupLassoConfig {
  double lambda = 0;
  double step = 0;  // <= 0 means 1 / ||(1/n) X^T X||_2
  Index max_iters = 2000;
  Index record_every = 10;
  double tol = 1e-9;  // stop when the iterate moves less than this (inf norm)
};

/// Proximal gradient descent on (1/2n) ||y - X w||^2 + lambda sum_l ||w_l||.
BaselineResult run_group_lasso_prox(const Problem& problem,
                                    const GroupLassoConfig& config);

struct TunedGroupLasso {
  double best_lambda = 0;
  BaselineResult result;  // refit on the full data at the winning lambda
};

/// Grid search over a logarithmic lambda grid (20 values from the null
/// threshold down by 1e-3), scored by validation MSE on a held-out split.
TunedGroupLasso tune_group_lasso(const Problem& problem, std::uint64_t seed,
                                 int n_lambdas = 20, double holdout_fraction = 0.2,
                                 Index max_iters = 2000);

}  // namespace igs
