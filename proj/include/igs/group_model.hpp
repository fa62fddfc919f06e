#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace igs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Disjoint cover of the index set {0, ..., p-1} by L contiguous groups.
class GroupPartition {
 public:
  explicit GroupPartition(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("partition: no groups");
    offsets_.reserve(sizes_.size());
    Index off = 0;
    for (const Index s : sizes_) {
      if (s < 1) throw std::invalid_argument("partition: group size < 1");
      offsets_.push_back(off);
      off += s;
    }
    p_ = off;
    group_of_.resize(static_cast<std::size_t>(p_));
    for (Index l = 0; l < num_groups(); ++l)
      for (Index i = offsets_[static_cast<std::size_t>(l)];
           i < offsets_[static_cast<std::size_t>(l)] + sizes_[static_cast<std::size_t>(l)]; ++i)
        group_of_[static_cast<std::size_t>(i)] = l;
  }

  static GroupPartition uniform(Index count, Index size) {
    return GroupPartition(std::vector<Index>(static_cast<std::size_t>(count), size));
  }

  Index dim() const { return p_; }
  Index num_groups() const { return static_cast<Index>(sizes_.size()); }
  Index size(Index l) const { return sizes_[static_cast<std::size_t>(l)]; }
  Index offset(Index l) const { return offsets_[static_cast<std::size_t>(l)]; }
  const std::vector<Index>& sizes() const { return sizes_; }

  /// Group index of coordinate i; throws on out-of-range i.
  Index group_of(Index i) const {
    if (i < 0 || i >= p_) throw std::out_of_range("group_of: index out of range");
    return group_of_[static_cast<std::size_t>(i)];
  }

  /// View of the coordinates of group l inside a length-p vector.
  template <class Derived>
  auto seg(Eigen::MatrixBase<Derived>& v, Index l) const {
    return v.segment(offset(l), size(l));
  }
  template <class Derived>
  auto seg(const Eigen::MatrixBase<Derived>& v, Index l) const {
    return v.segment(offset(l), size(l));
  }

  /// Columns of a n-by-p design matrix belonging to group l.
  template <class Derived>
  auto block(const Eigen::MatrixBase<Derived>& X, Index l) const {
    return X.middleCols(offset(l), size(l));
  }

  bool operator==(const GroupPartition& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  std::vector<Index> group_of_;
  Index p_ = 0;
};

/// Overparameterized state: per-group magnitudes u in R^L and per-coordinate
/// directions v in R^p. The predictor of group l is u_l^2 * v_l.
struct GroupedParams {
  VectorXd u;
  VectorXd v;
};

/// Magnitude/direction form of a reference parameter vector. Off-support
/// groups carry u_star = 0 and a zero direction by convention.
struct GroundTruth {
  VectorXd w_star;
  VectorXd u_star;
  VectorXd v_star;
  std::vector<Index> support;  // sorted group indices

  Index s() const { return static_cast<Index>(support.size()); }

  bool on_support(Index l) const {
    return std::binary_search(support.begin(), support.end(), l);
  }

  double u_star_max() const {
    double m = 0;
    for (const Index l : support) m = std::max(m, u_star[l]);
    return m;
  }
  double u_star_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Index l : support) m = std::min(m, u_star[l]);
    return m;
  }
};

/// w_i = u_{g(i)}^2 * v_i.
inline VectorXd predictor(const GroupedParams& params, const GroupPartition& part) {
  if (params.u.size() != part.num_groups() || params.v.size() != part.dim())
    throw std::invalid_argument("predictor: dimension mismatch");
  VectorXd w(part.dim());
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double m = params.u[l] * params.u[l];
    part.seg(w, l) = m * part.seg(params.v, l);
  }
  return w;
}

constexpr double kOffSupportThreshold = 1e-10;

/// Split w into per-group magnitude sqrt(||w_l||) and unit direction.
/// Groups with ||w_l|| <= threshold are treated as off-support.
inline GroundTruth decompose(const VectorXd& w, const GroupPartition& part,
                             double threshold = kOffSupportThreshold) {
  if (w.size() != part.dim())
    throw std::invalid_argument("decompose: dimension mismatch");
  GroundTruth t;
  t.w_star = w;
  t.u_star = VectorXd::Zero(part.num_groups());
  t.v_star = VectorXd::Zero(part.dim());
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double norm = part.seg(w, l).norm();
    if (norm > threshold) {
      t.u_star[l] = std::sqrt(norm);
      part.seg(t.v_star, l) = part.seg(w, l) / norm;
      t.support.push_back(l);
    }
  }
  return t;
}

}  // namespace igs
