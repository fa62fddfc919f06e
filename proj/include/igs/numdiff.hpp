#pragma once

#include <Eigen/Dense>

#include <functional>

namespace igs {

// Central-difference machinery for checking closed forms against a purely
// numeric route. Everything here knows nothing about the closed forms it is
// used to verify.

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference gradient of a scalar function.
inline Eigen::VectorXd numeric_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    const double fp = f(xp);
    xp[k] = x[k] - h;
    const double fm = f(xp);
    xp[k] = x[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector field, one column per coordinate.
inline Eigen::MatrixXd numeric_jacobian(const VectorField& F,
                                        const Eigen::VectorXd& x, double h = 1e-5) {
  const Eigen::VectorXd f0 = F(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    const Eigen::VectorXd fp = F(xp);
    xp[k] = x[k] - h;
    const Eigen::VectorXd fm = F(xp);
    xp[k] = x[k];
    J.col(k) = (fp - fm) / (2.0 * h);
  }
  return J;
}

/// [F, G](x) = dF(x) G(x) - dG(x) F(x) with numeric Jacobians -- the sign
/// convention under which the closed forms in geometry.hpp hold.
inline Eigen::VectorXd numeric_lie_bracket(const VectorField& F, const VectorField& G,
                                           const Eigen::VectorXd& x, double h = 1e-5) {
  return numeric_jacobian(F, x, h) * G(x) - numeric_jacobian(G, x, h) * F(x);
}

}  // namespace igs
