#include "igs/verification.hpp"

#include <cmath>
#include <sstream>

#include "igs/flow.hpp"
#include "igs/geometry.hpp"
#include "igs/gradient.hpp"
#include "igs/numdiff.hpp"
#include "igs/rng.hpp"

namespace igs {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double rel_err(const VectorXd& a, const VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace

CheckResult check_gradients(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0;
  for (int k = 0; k < instances; ++k) {
    const Index n = 2 + static_cast<Index>(rng.uniform() * 9);   // 2..10
    std::vector<Index> sizes;
    Index p = 0;
    while (p < 3) {
      const Index s = 1 + static_cast<Index>(rng.uniform() * 3);  // 1..3
      if (p + s > 8) break;
      sizes.push_back(s);
      p += s;
    }
    GroupPartition part(sizes);
    Problem problem{MatrixXd(n, part.dim()), VectorXd(n), part,
                    std::nullopt, std::nullopt, 0};
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < part.dim(); ++j) problem.X(i, j) = rng.gaussian();
    problem.y = rng.gaussian_vector(n);
    GroupedParams params{rng.gaussian_vector(part.num_groups()),
                         rng.gaussian_vector(part.dim())};

    const GradientPair g = gradients(params, problem);
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto objective = [&](const VectorXd& x) {
      GroupedParams q{x.head(part.num_groups()), x.tail(part.dim())};
      return inv_n * loss(q, problem);
    };
    const VectorXd fd =
        numeric_gradient(objective, ambient_point(params), 1e-6);
    worst = std::max(worst, rel_err(g.grad_u, fd.head(part.num_groups()).eval()));
    worst = std::max(worst, rel_err(g.grad_v, fd.tail(part.dim()).eval()));
  }
  CheckResult res;
  res.name = "gradients";
  res.passed = worst < 1e-5;
  res.detail = "max relative error vs finite differences: " + fmt(worst);
  return res;
}

CheckResult check_brackets(int points, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::vector<Index>> shapes = {{2}, {3, 2}, {1, 3, 2}, {2, 2, 1}};
  double worst_grad = 0, worst_bracket = 0, worst_nested = 0, worst_cross = 0;
  double worst_cross_numeric = 0;
  double max_nested_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    GroupPartition part(shapes[static_cast<std::size_t>(k) % shapes.size()]);
    const Index L = part.num_groups();
    GroupedParams params{VectorXd(L), VectorXd(part.dim())};
    // Magnitudes bounded away from zero keep the relative tolerances honest.
    for (Index l = 0; l < L; ++l)
      params.u[l] = (0.5 + rng.uniform()) * (rng.rademacher());
    for (Index i = 0; i < part.dim(); ++i)
      params.v[i] = (0.5 + rng.uniform()) * (rng.rademacher());
    const VectorXd x = ambient_point(params);

    const auto field = [&](Index i) {
      return VectorField([&part, i](const VectorXd& z) {
        return grad_G(i, split_ambient(z, part), part).eval();
      });
    };

    for (Index i = 0; i < part.dim(); ++i) {
      const auto Gi = [&](const VectorXd& z) {
        return reparam_map(z, part)[i];
      };
      worst_grad = std::max(
          worst_grad,
          rel_err(grad_G(i, params, part), numeric_gradient(Gi, x, 1e-5)));
    }
    for (Index i = 0; i < part.dim(); ++i) {
      for (Index j = i + 1; j < part.dim(); ++j) {
        const VectorXd closed = lie_bracket(i, j, params, part);
        const VectorXd numeric = numeric_lie_bracket(field(i), field(j), x, 1e-5);
        if (part.group_of(i) == part.group_of(j)) {
          worst_bracket = std::max(worst_bracket, rel_err(closed, numeric));
          const double inner = nested_bracket_inner(i, j, params, part);
          max_nested_value = std::max(max_nested_value, inner);
          // Numeric route: differentiate the closed-form bracket field W and
          // the coordinate gradient, assemble dW gradG_i - hess(G_i) W, then
          // take the inner product with grad G_j.
          const VectorField W([&part, i, j](const VectorXd& z) {
            GroupedParams q = split_ambient(z, part);
            return lie_bracket(i, j, q, part).eval();
          });
          const VectorXd gi = grad_G(i, params, part);
          const VectorXd nested =
              numeric_jacobian(W, x, 1e-4) * gi -
              numeric_jacobian(field(i), x, 1e-4) * W(x);
          worst_nested = std::max(
              worst_nested, rel_err(inner, grad_G(j, params, part).dot(nested)));
        } else {
          worst_cross = std::max(worst_cross, closed.norm());
          worst_cross_numeric = std::max(worst_cross_numeric, numeric.norm());
        }
      }
    }
  }
  CheckResult res;
  res.name = "brackets";
  res.passed = worst_grad < 1e-6 && worst_bracket < 1e-6 && worst_nested < 1e-4 &&
               worst_cross == 0.0 && worst_cross_numeric < 1e-6 &&
               max_nested_value < 0;
  res.detail = "grad " + fmt(worst_grad) + ", bracket " + fmt(worst_bracket) +
               ", nested " + fmt(worst_nested) + ", cross-group closed/numeric " +
               fmt(worst_cross) + "/" + fmt(worst_cross_numeric) +
               ", max nested inner " + fmt(max_nested_value);
  return res;
}

BalanceCheck check_balance(std::uint64_t seed) {
  GroupPartition part(std::vector<Index>{3, 3, 3, 3});
  const MatrixXd X = orthogonal_design(part, seed);
  // Large entries push the RK4 truncation error above the rounding floor so
  // the dt^4 scaling of the drift is actually observable; gentler instances
  // conserve the balance to ~1e-14 at every dt, where a halving test says
  // nothing.
  VectorXd values = VectorXd::Constant(6, 60.0);
  GroundTruth truth = generate_signal(part, {0, 2}, values);
  Problem problem = observe(X, part, truth, VectorXd::Zero(part.dim()), seed);

  FlowConfig cfg;
  cfg.theta = 0.2;
  cfg.dt = 1e-3;
  cfg.t_max = 50.0;
  cfg.record_every = 1;
  const auto drift_of = [&](double dt) {
    FlowConfig c = cfg;
    c.dt = dt;
    double worst = 0;
    for (const FlowState& s : integrate(problem, c))
      worst = std::max(worst, s.balance.cwiseAbs().maxCoeff());
    return worst;
  };

  BalanceCheck out;
  out.drift_dt = drift_of(cfg.dt);
  out.drift_half_dt = drift_of(cfg.dt / 2);
  out.result.name = "balance";
  out.result.passed =
      out.drift_dt <= 1e-8 && out.drift_half_dt * 8.0 <= out.drift_dt;
  out.result.detail = "max drift " + fmt(out.drift_dt) + " at dt=1e-3, " +
                      fmt(out.drift_half_dt) + " at dt=5e-4";
  return out;
}

NoiseBoundCheck check_noise_bound(int trials, Index n, Index p, double sigma,
                                  std::uint64_t seed) {
  GroupPartition part = GroupPartition::uniform(p, 1);
  const double threshold =
      2.0 * std::sqrt(2.0 * sigma * sigma * std::log(2.0 * static_cast<double>(p)) /
                      static_cast<double>(n));
  int exceed = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + seed_offset::kRepStride * static_cast<std::uint64_t>(t);
    MatrixXd X = generate_design(n, part, DesignDist::Gaussian, s + seed_offset::kDesign);
    // Columns rescaled to ||col|| = sqrt(n).
    for (Index j = 0; j < p; ++j) {
      const double norm = X.col(j).norm();
      if (norm > 0) X.col(j) *= std::sqrt(static_cast<double>(n)) / norm;
    }
    const VectorXd xi = generate_noise(n, sigma, s + seed_offset::kNoise);
    if (noise_linf(X, xi) > threshold) ++exceed;
  }
  NoiseBoundCheck out;
  out.exceedance = static_cast<double>(exceed) / static_cast<double>(trials);
  out.bound = 1.0 / (8.0 * std::pow(static_cast<double>(p), 3)) + 0.01;
  out.result.name = "noise-bound";
  out.result.passed = out.exceedance <= out.bound;
  out.result.detail = "exceedance " + fmt(out.exceedance) + " vs allowed " +
                      fmt(out.bound) + " (threshold " + fmt(threshold) + ")";
  return out;
}

std::vector<CheckResult> run_suite(const std::string& name) {
  std::vector<CheckResult> results;
  const bool all = name == "all";
  if (all || name == "gradients") results.push_back(check_gradients());
  if (all || name == "brackets") results.push_back(check_brackets());
  if (all || name == "balance") results.push_back(check_balance().result);
  if (all || name == "noise-bound") results.push_back(check_noise_bound().result);
  if (results.empty()) throw std::invalid_argument("unknown verify suite: " + name);
  return results;
}

}  // namespace igs
