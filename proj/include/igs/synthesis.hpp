#pragma once

#include <optional>
#include <string>

#include "igs/group_model.hpp"

namespace igs {

/// A regression instance y = X w* + xi, with the generating pieces kept
/// around for diagnostics when available.
struct Problem {
  MatrixXd X;
  VectorXd y;
  GroupPartition partition;
  std::optional<GroundTruth> truth;
  std::optional<VectorXd> noise;
  std::uint64_t seed = 0;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

enum class DesignDist { Rademacher, Gaussian };

/// Block coherence diagnostics: delta_in is the worst within-group Gram
/// deviation from identity, delta_out the worst cross-group block operator
/// norm, both of X scaled by 1/sqrt(n).
struct CoherenceReport {
  double delta_in = 0;
  double delta_out = 0;
  std::optional<MatrixXd> per_pair;  // L-by-L, diag holds within-group values
};

/// n-by-p design with i.i.d. entries (+-1 or standard normal).
MatrixXd generate_design(Index n, const GroupPartition& part, DesignDist dist,
                         std::uint64_t seed);

/// Square design X = sqrt(n) * Q with Q orthogonal (n = p), so that
/// (1/n) X^T X = I holds to machine precision.
MatrixXd orthogonal_design(const GroupPartition& part, std::uint64_t seed);

/// Group-sparse reference signal: `values` holds the entries of the supported
/// groups, concatenated in support order; everything else is zero.
GroundTruth generate_signal(const GroupPartition& part,
                            const std::vector<Index>& support,
                            const VectorXd& values);

/// i.i.d. N(0, sigma^2) noise.
VectorXd generate_noise(Index n, double sigma, std::uint64_t seed);

/// Assemble y = X w* + xi.
Problem observe(MatrixXd X, const GroupPartition& part, GroundTruth truth,
                VectorXd noise, std::uint64_t seed = 0);

/// Largest magnitude eigenvalue of a symmetric matrix (power iteration on
/// A^2; tolerance 1e-10, capped at 10000 sweeps).
double sym_operator_norm(const MatrixXd& A);

/// Largest singular value (power iteration on M^T M).
double spectral_norm(const MatrixXd& M);

CoherenceReport coherence(const MatrixXd& X, const GroupPartition& part,
                          bool want_per_pair = false);

/// || (1/n) X^T xi ||_inf.
double noise_linf(const MatrixXd& X, const VectorXd& xi);

/// Binary container for problems (column-major payload, small header with
/// n, p, group sizes and seed) used for experiment replay.
void save_problem(const std::string& path, const Problem& problem);
Problem load_problem(const std::string& path);

}  // namespace igs
