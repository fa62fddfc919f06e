#pragma once

#include <optional>

#include "igs/gradient.hpp"
#include "igs/metrics.hpp"

namespace igs {

enum class EtaMode { Adaptive, Constant };
enum class VInit { RandomUnit, WarmStart };
enum class StopRule { FixedIters, HoldoutLoss, TheoreticalWindow };
enum class SwitchRule { None, OracleHalfUstar, RelativeChange };
enum class StopReason { MaxIters, HoldoutStop, WindowStop, Diverged };
enum class FinalSelection { AtStop, BestValidation };

struct OptimizerConfig {
  double alpha = 1e-6;   // initial magnitude, u(0) = alpha * 1
  double gamma = 1e-3;   // magnitude step size
  EtaMode eta_mode = EtaMode::Adaptive;
  double eta_constant = 1e-3;  // direction step after a switch / in constant mode
  VInit v_init = VInit::RandomUnit;
  std::uint64_t seed = 0;  // direction init + holdout split
  Index max_iters = 10000;
  Index record_every = 1;

  StopRule stop_rule = StopRule::FixedIters;
  int patience = 200;             // holdout
  double holdout_fraction = 0.2;  // holdout
  double epsilon = 1e-3;          // precision parameter for the theoretical window
  // Which iterate a stopped run hands back. Holdout defaults to the best
  // validation iterate; the other rules return the iterate at the stop.
  std::optional<FinalSelection> final_selection;

  SwitchRule switch_rule = SwitchRule::None;
  double tau = 0.01;
  double eps_small = 1e-8;

  double divergence_factor = 1e3;
};

/// Iteration window from the magnitude/noise scales of the reference signal.
struct TheoreticalBounds {
  double zeta = 0;
  double t_lb = 0;
  double t_ub = 0;
  // zeta >= (u*_max)^2: the error target is met at initialization and the
  // window carries no information.
  bool vacuous = false;
};

struct RunResult {
  GroupedParams final_params;
  Trajectory trajectory;
  Index stop_iter = 0;
  std::optional<Index> switch_iter;
  StopReason stop_reason = StopReason::MaxIters;
  bool direction_degeneracy = false;  // some ||z_l|| vanished along the way
  std::optional<Index> best_val_iter;
};

/// u(0) = alpha * 1; each v_l(0) unit norm, either uniform on the sphere or
/// the normalized (1/n) X_l^T y direction (with a random fallback for groups
/// where that correlation vanishes).
GroupedParams init_state(const OptimizerConfig& config, const Problem& problem);

/// One weight-normalized descent step:
///   z_l = v_l - eta_l * grad_v|_l   (computed as v_l + (1/u_l^2)(1/n)X_l^T r
///                                    in adaptive mode),
///   v_l(t+1) = z_l / ||z_l||,
///   u(t+1) = u(t) - gamma * grad_u(u(t), v(t+1)).
/// Groups with u_l = 0 are frozen for the step in adaptive mode; a vanishing
/// ||z_l|| keeps the old direction and raises *degenerate.
GroupedParams step_alg1(const GroupedParams& state, const Problem& problem,
                        const OptimizerConfig& config,
                        EtaMode mode = EtaMode::Adaptive,
                        bool* degenerate = nullptr);

/// Algorithm with the adaptive per-group direction step throughout.
RunResult run_alg1(const Problem& problem, const OptimizerConfig& config);

/// Same as run_alg1 until the switch rule fires, then the direction step
/// becomes the constant eta for all groups.
RunResult run_alg2(const Problem& problem, const OptimizerConfig& config);

/// zeta = 80 (noise_linf v epsilon) and the iteration window formulas
///   T_lb = log((u*_max)^2 / (2 a^2)) / (2 log(1 + (g/2)(zeta v (u*_min)^2)))
///          + floor(log2((u*_max)^2 / zeta)) * 5 / (2 g (zeta v (u*_min)^2))
///   T_ub = 5 / (16 g (zeta v (u*_min)^2)) * log(1 / a^4).
/// Requires a nonempty support.
TheoreticalBounds theoretical_bounds(const GroundTruth& truth, double noise_linf,
                                     double epsilon, double alpha, double gamma);

/// max_l |u_next - u_prev| / |u_prev + eps_small| < tau.
bool switch_criterion_relative(const VectorXd& u_prev, const VectorXd& u_next,
                               double tau, double eps_small);

/// u_l^2 >= (u*_l)^2 / 2 for every supported group.
bool switch_criterion_oracle(const GroupedParams& state, const GroundTruth& truth);

}  // namespace igs
