#pragma once

#include "igs/synthesis.hpp"

namespace igs {

struct GradientPair {
  VectorXd grad_u;  // length L
  VectorXd grad_v;  // length p
};

/// r = y - X w(u, v).
inline VectorXd residual(const GroupedParams& params, const Problem& problem) {
  return problem.y - problem.X * predictor(params, problem.partition);
}

/// Plain squared loss 0.5 * ||y - X w||^2.
inline double loss(const GroupedParams& params, const Problem& problem) {
  return 0.5 * residual(params, problem).squaredNorm();
}

/// Gradients of the sample-averaged objective loss(u, v) / n:
///   grad_u[l]        = -(2/n) u_l v_l^T X_l^T r
///   grad_v on group l = -(1/n) u_l^2 X_l^T r
/// This 1/n scaling is the one every solver and flow in the project uses.
inline GradientPair gradients(const GroupedParams& params, const Problem& problem) {
  const GroupPartition& part = problem.partition;
  if (params.u.size() != part.num_groups() || params.v.size() != part.dim())
    throw std::invalid_argument("gradients: dimension mismatch");
  const VectorXd r = residual(params, problem);
  const VectorXd g = (problem.X.transpose() * r) / static_cast<double>(problem.n());
  GradientPair out;
  out.grad_u.resize(part.num_groups());
  out.grad_v.resize(part.dim());
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double ul = params.u[l];
    out.grad_u[l] = -2.0 * ul * part.seg(params.v, l).dot(part.seg(g, l));
    part.seg(out.grad_v, l) = -(ul * ul) * part.seg(g, l);
  }
  return out;
}

}  // namespace igs
