#include "igs/flow.hpp"

#include <cmath>

#include "igs/rng.hpp"

namespace igs {

GradientPair flow_rhs(const GroupedParams& params, const Problem& problem) {
  GradientPair g = gradients(params, problem);
  g.grad_u = -g.grad_u;
  g.grad_v = -g.grad_v;
  return g;
}

GroupedParams balanced_warm_init(const Problem& problem, double theta,
                                 std::uint64_t seed) {
  if (theta <= 0) throw std::invalid_argument("balanced_warm_init: theta must be > 0");
  const GroupPartition& part = problem.partition;
  GroupedParams state;
  state.u = VectorXd::Constant(part.num_groups(), theta);
  state.v.resize(part.dim());
  const VectorXd g =
      (problem.X.transpose() * problem.y) / static_cast<double>(problem.n());
  const double target_norm = theta / std::sqrt(2.0);
  Rng rng(seed + seed_offset::kFallback);
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double norm = part.seg(g, l).norm();
    if (norm > 0)
      part.seg(state.v, l) = (target_norm / norm) * part.seg(g, l);
    else
      part.seg(state.v, l) = target_norm * rng.unit_sphere(part.size(l));
  }
  return state;
}

VectorXd balance_vector(const GroupedParams& params, const GroupPartition& part) {
  VectorXd b(part.num_groups());
  for (Index l = 0; l < part.num_groups(); ++l)
    b[l] = 0.5 * params.u[l] * params.u[l] - part.seg(params.v, l).squaredNorm();
  return b;
}

namespace {

GroupedParams axpy(const GroupedParams& x, double a, const GradientPair& d) {
  return GroupedParams{x.u + a * d.grad_u, x.v + a * d.grad_v};
}

GroupedParams rk4_step(const GroupedParams& x, const Problem& problem, double dt) {
  const GradientPair k1 = flow_rhs(x, problem);
  const GradientPair k2 = flow_rhs(axpy(x, 0.5 * dt, k1), problem);
  const GradientPair k3 = flow_rhs(axpy(x, 0.5 * dt, k2), problem);
  const GradientPair k4 = flow_rhs(axpy(x, dt, k3), problem);
  GroupedParams next = x;
  next.u += (dt / 6.0) * (k1.grad_u + 2.0 * k2.grad_u + 2.0 * k3.grad_u + k4.grad_u);
  next.v += (dt / 6.0) * (k1.grad_v + 2.0 * k2.grad_v + 2.0 * k3.grad_v + k4.grad_v);
  return next;
}

}  // namespace

std::vector<FlowState> integrate_from(GroupedParams state, const Problem& problem,
                                      const FlowConfig& config) {
  if (config.dt <= 0 || config.t_max <= 0)
    throw std::invalid_argument("integrate: dt and t_max must be > 0");
  const GroupPartition& part = problem.partition;
  const auto n_steps = static_cast<Index>(std::llround(config.t_max / config.dt));
  const Index stride = std::max<Index>(1, config.record_every);

  std::vector<FlowState> out;
  out.reserve(static_cast<std::size_t>(n_steps / stride + 2));
  out.push_back({0.0, state, balance_vector(state, part)});
  for (Index k = 1; k <= n_steps; ++k) {
    state = config.integrator == Integrator::RK4
                ? rk4_step(state, problem, config.dt)
                : axpy(state, config.dt, flow_rhs(state, problem));
    if (!state.u.allFinite() || !state.v.allFinite())
      throw std::runtime_error("integrate: non-finite state at t = " +
                               std::to_string(static_cast<double>(k) * config.dt));
    if (k % stride == 0 || k == n_steps)
      out.push_back({static_cast<double>(k) * config.dt, state,
                     balance_vector(state, part)});
  }
  return out;
}

std::vector<FlowState> integrate(const Problem& problem, const FlowConfig& config) {
  return integrate_from(balanced_warm_init(problem, config.theta, config.seed),
                        problem, config);
}

}  // namespace igs
