#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "igs/synthesis.hpp"

namespace igs {

/// One measurement of a solver iterate. Error fields are NaN when the problem
/// carries no ground truth; `alignments` then stays empty.
struct TrajectoryRecord {
  Index iter = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double linf_on = std::numeric_limits<double>::quiet_NaN();
  double linf_off = std::numeric_limits<double>::quiet_NaN();
  VectorXd group_magnitudes;  // ||w_l||, length L
  VectorXd alignments;        // <w_l/||w_l||, v*_l> per support group
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;

  bool empty() const { return records.empty(); }
  const TrajectoryRecord& back() const { return records.back(); }

  /// Index into `records` of the smallest l2 error (NaN-aware).
  std::size_t argmin_l2() const;
};

/// Measure a predictor vector against the problem: loss, recovery errors,
/// per-group magnitudes and direction alignments on the true support.
TrajectoryRecord measure_w(const VectorXd& w, const Problem& problem, Index iter = 0);

inline TrajectoryRecord measure(const GroupedParams& params, const Problem& problem,
                                Index iter = 0) {
  return measure_w(predictor(params, problem.partition), problem, iter);
}

/// log(max(x, 1e-16)) -- keeps exact recovery out of -inf.
double log_error(double x);

/// Per-iteration mean and quantiles of log l2 error across repetitions.
/// Trajectories shorter than the longest one are extended by holding their
/// final record (the stopped iterate keeps its error).
struct AggregateSummary {
  std::vector<Index> iters;
  VectorXd mean_log_l2;
  std::vector<double> quantile_levels;
  MatrixXd quantiles;  // one row per level
};

AggregateSummary aggregate(const std::vector<Trajectory>& trajectories,
                           std::vector<double> quantile_levels = {0.25, 0.5, 0.75});

/// CSV schema, fixed column order:
///   iter,loss,val_loss,l2_error,linf_on,linf_off,mag_0..mag_{L-1},align_<l>...
/// with one align column per support group l, floats printed with 17
/// significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<Index>& support);
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<Index>& support);

void write_aggregate_csv(std::ostream& os, const AggregateSummary& summary);
void write_aggregate_csv(const std::string& path, const AggregateSummary& summary);

}  // namespace igs
