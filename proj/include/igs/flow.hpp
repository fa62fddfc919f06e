#pragma once

#include "igs/gradient.hpp"

namespace igs {

enum class Integrator { RK4, Euler };

struct FlowConfig {
  double theta = 1e-4;  // initial magnitude scale
  double dt = 1e-3;
  double t_max = 50.0;
  Integrator integrator = Integrator::RK4;
  Index record_every = 1;        // in steps
  std::uint64_t seed = 0;        // fallback directions for zero-correlation groups
};

struct FlowState {
  double t = 0;
  GroupedParams params;
  VectorXd balance;  // per group: u_l^2 / 2 - ||v_l||^2, conserved by the flow
};

/// Right-hand side of the continuous-time dynamics, i.e. the negated
/// gradients of the sample-averaged loss:
///   du_l/dt = (2/n) u_l v_l^T X_l^T r,  dv_l/dt = (1/n) u_l^2 X_l^T r.
GradientPair flow_rhs(const GroupedParams& params, const Problem& problem);

/// u_l(0) = theta; v_l(0) along (1/n) X_l^T y, rescaled so that
/// ||v_l(0)||^2 = theta^2 / 2, which zeroes the balance at t = 0. Groups with
/// vanishing correlation get a random direction of the same norm.
GroupedParams balanced_warm_init(const Problem& problem, double theta,
                                 std::uint64_t seed = 0);

VectorXd balance_vector(const GroupedParams& params, const GroupPartition& part);

/// Fixed-step integration from the balanced warm start; throws on a
/// non-finite state.
std::vector<FlowState> integrate(const Problem& problem, const FlowConfig& config);

/// Same, from an explicit initial state.
std::vector<FlowState> integrate_from(GroupedParams state, const Problem& problem,
                                      const FlowConfig& config);

}  // namespace igs
