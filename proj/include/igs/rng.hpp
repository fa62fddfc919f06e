#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace igs {

// Seed layout used across the project: every random component draws from its
// own generator whose seed is derived from the experiment master seed by a
// fixed arithmetic offset. Repetition k of an experiment lives at
// master + kRepStride * k, and each component adds its offset on top.
namespace seed_offset {
constexpr std::uint64_t kRepStride = 1000003;
constexpr std::uint64_t kDesign = 1;
constexpr std::uint64_t kNoise = 2;
constexpr std::uint64_t kInit = 3;
constexpr std::uint64_t kHoldout = 4;
constexpr std::uint64_t kFallback = 5;
}  // namespace seed_offset

inline std::uint64_t rep_seed(std::uint64_t master, int rep) {
  return master + seed_offset::kRepStride * static_cast<std::uint64_t>(rep);
}

/// Reproducible random source: a mersenne-twister (mt19937_64, whose output
/// sequence is fixed by the C++ standard) plus hand-rolled output
/// transformations, so that streams are bit-identical across platforms and
/// standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch only; one value per pair
  /// of uniforms, which keeps the stream layout trivial).
  double gaussian() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * EIGEN_PI * u2);
  }

  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  /// Uniform draw from the unit sphere in R^k.
  Eigen::VectorXd unit_sphere(Eigen::Index k) {
    Eigen::VectorXd v = gaussian_vector(k);
    double norm = v.norm();
    while (norm == 0.0) {  // not reachable in practice, kept for totality
      v = gaussian_vector(k);
      norm = v.norm();
    }
    return v / norm;
  }

  /// Deterministic permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<Eigen::Index> permutation(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(
          engine_() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(j)]);
    }
    return idx;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace igs
