#include "igs/geometry.hpp"

#include <ostream>

namespace igs {

VectorXd grad_G(Index i, const GroupedParams& params, const GroupPartition& part) {
  if (i < 0 || i >= part.dim()) throw std::out_of_range("grad_G: index out of range");
  const Index L = part.num_groups();
  const Index g = part.group_of(i);
  VectorXd out = VectorXd::Zero(L + part.dim());
  out[g] = 2.0 * params.u[g] * params.v[i];
  out[L + i] = params.u[g] * params.u[g];
  return out;
}

VectorXd lie_bracket(Index i, Index j, const GroupedParams& params,
                     const GroupPartition& part) {
  if (i < 0 || i >= part.dim() || j < 0 || j >= part.dim())
    throw std::out_of_range("lie_bracket: index out of range");
  const Index L = part.num_groups();
  VectorXd out = VectorXd::Zero(L + part.dim());
  if (i == j || part.group_of(i) != part.group_of(j)) return out;
  const double u2 = params.u[part.group_of(i)] * params.u[part.group_of(i)];
  out[L + i] = 4.0 * u2 * params.v[j];
  out[L + j] = -4.0 * u2 * params.v[i];
  return out;
}

double nested_bracket_inner(Index i, Index j, const GroupedParams& params,
                            const GroupPartition& part) {
  if (i == j || part.group_of(i) != part.group_of(j))
    throw std::invalid_argument(
        "nested_bracket_inner: defined for distinct indices in one group");
  const double u = params.u[part.group_of(i)];
  const double u4 = u * u * u * u;
  return -16.0 * u4 * params.v[j] * params.v[j] -
         16.0 * u4 * params.v[i] * params.v[i] - 4.0 * u4 * u * u;
}

CommutationReport commutation_report(const GroupedParams& params,
                                     const GroupPartition& part) {
  CommutationReport report;
  for (Index i = 0; i < part.dim(); ++i) {
    for (Index j = i + 1; j < part.dim(); ++j) {
      const double norm = lie_bracket(i, j, params, part).norm();
      if (part.group_of(i) == part.group_of(j)) {
        ++report.same_group_pairs;
        report.max_same_group_bracket_norm =
            std::max(report.max_same_group_bracket_norm, norm);
        const double inner = nested_bracket_inner(i, j, params, part);
        report.max_nested_inner = std::max(report.max_nested_inner, inner);
        if (inner >= 0) report.all_nested_negative = false;
      } else {
        ++report.cross_group_pairs;
        report.max_cross_group_bracket_norm =
            std::max(report.max_cross_group_bracket_norm, norm);
      }
      if (norm != 0.0) report.commuting_at_point = false;
    }
  }
  // With no same-group pairs (all groups of size one) the negativity claim is
  // vacuous; all_nested_negative stays true and same_group_pairs tells.
  return report;
}

std::ostream& operator<<(std::ostream& os, const CommutationReport& report) {
  os << "pairs scanned: " << report.same_group_pairs << " same-group, "
     << report.cross_group_pairs << " cross-group\n"
     << "max cross-group bracket norm: " << report.max_cross_group_bracket_norm
     << "\n"
     << "max same-group bracket norm:  " << report.max_same_group_bracket_norm
     << "\n"
     << "max nested inner product:     " << report.max_nested_inner << "\n"
     << (report.commuting_at_point
             ? "no non-commuting witness at this point\n"
             : "non-commuting witness found\n");
  return os;
}

}  // namespace igs
