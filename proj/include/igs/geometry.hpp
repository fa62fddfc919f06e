#pragma once

#include <iosfwd>

#include "igs/group_model.hpp"

namespace igs {

// The reparameterization map G sends the ambient point [u; v] in R^{L+p} to
// the predictor in R^p. Ambient vectors are ordered u-block first, so basis
// index g(i) touches u_{g(i)} and basis index L+i touches v_i.
//
// Bracket sign convention: [F, G] = dF G - dG F. The nested inner product
// applies the outer bracket as d[.,.] gradG_i - hess(G_i) [.,.] to the
// closed-form inner bracket, which is what makes its closed form negative.

/// Pack (u, v) into one ambient point.
inline VectorXd ambient_point(const GroupedParams& params) {
  VectorXd x(params.u.size() + params.v.size());
  x.head(params.u.size()) = params.u;
  x.tail(params.v.size()) = params.v;
  return x;
}

inline GroupedParams split_ambient(const VectorXd& x, const GroupPartition& part) {
  return GroupedParams{x.head(part.num_groups()), x.tail(part.dim())};
}

/// G evaluated at an ambient point (used by the numeric oracles).
inline VectorXd reparam_map(const VectorXd& x, const GroupPartition& part) {
  return predictor(split_ambient(x, part), part);
}

/// Closed-form gradient of the coordinate map G_i:
/// 2 u_{g(i)} v_i at slot g(i) and u_{g(i)}^2 at slot L+i.
VectorXd grad_G(Index i, const GroupedParams& params, const GroupPartition& part);

/// Closed-form Lie bracket [grad G_i, grad G_j]: zero across groups and on the
/// diagonal; within a group 4 u^2 v_j at slot L+i and -4 u^2 v_i at slot L+j.
VectorXd lie_bracket(Index i, Index j, const GroupedParams& params,
                     const GroupPartition& part);

/// <grad G_j, [grad G_i, [grad G_i, grad G_j]]> for i != j in the same group:
/// -16 u^4 v_j^2 - 16 u^4 v_i^2 - 4 u^6, strictly negative whenever u != 0.
double nested_bracket_inner(Index i, Index j, const GroupedParams& params,
                            const GroupPartition& part);

/// Full scan over index pairs: the computational witness that the
/// parameterization does not commute (and so cannot be emulated by any
/// mirror flow).
struct CommutationReport {
  double max_cross_group_bracket_norm = 0;  // expected exactly 0
  double max_same_group_bracket_norm = 0;
  double max_nested_inner = -std::numeric_limits<double>::infinity();
  Index same_group_pairs = 0;
  Index cross_group_pairs = 0;
  bool commuting_at_point = true;     // no nonzero bracket found
  bool all_nested_negative = true;    // over same-group pairs, when any exist
};

CommutationReport commutation_report(const GroupedParams& params,
                                     const GroupPartition& part);

std::ostream& operator<<(std::ostream& os, const CommutationReport& report);

}  // namespace igs
