#include "igs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace igs {

std::size_t Trajectory::argmin_l2() const {
  if (records.empty()) throw std::runtime_error("argmin_l2: empty trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].l2_error < records[best].l2_error) best = i;
  return best;
}

TrajectoryRecord measure_w(const VectorXd& w, const Problem& problem, Index iter) {
  const GroupPartition& part = problem.partition;
  TrajectoryRecord rec;
  rec.iter = iter;
  rec.loss = 0.5 * (problem.y - problem.X * w).squaredNorm();
  rec.group_magnitudes.resize(part.num_groups());
  for (Index l = 0; l < part.num_groups(); ++l)
    rec.group_magnitudes[l] = part.seg(w, l).norm();
  if (!problem.truth) return rec;

  const GroundTruth& truth = *problem.truth;
  const VectorXd err = w - truth.w_star;
  rec.l2_error = err.norm();
  rec.linf_on = 0;
  rec.linf_off = 0;
  for (Index l = 0; l < part.num_groups(); ++l) {
    const double e = part.seg(err, l).cwiseAbs().maxCoeff();
    double& slot = truth.on_support(l) ? rec.linf_on : rec.linf_off;
    slot = std::max(slot, e);
  }
  rec.alignments.resize(truth.s());
  for (Index k = 0; k < truth.s(); ++k) {
    const Index l = truth.support[static_cast<std::size_t>(k)];
    const double norm = rec.group_magnitudes[l];
    rec.alignments[k] =
        norm > 0 ? part.seg(w, l).dot(part.seg(truth.v_star, l)) / norm : 0.0;
  }
  return rec;
}

double log_error(double x) { return std::log(std::max(x, 1e-16)); }

namespace {

// Linearly interpolated quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double level) {
  const auto m = sorted.size();
  if (m == 1) return sorted[0];
  const double h = static_cast<double>(m - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, m - 1);
  return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

AggregateSummary aggregate(const std::vector<Trajectory>& trajectories,
                           std::vector<double> quantile_levels) {
  if (trajectories.empty()) throw std::invalid_argument("aggregate: no trajectories");
  std::size_t longest = 0;
  for (const auto& t : trajectories) {
    if (t.empty()) throw std::invalid_argument("aggregate: empty trajectory");
    longest = std::max(longest, t.records.size());
  }
  const Trajectory* grid_owner = nullptr;
  for (const auto& t : trajectories)
    if (t.records.size() == longest) { grid_owner = &t; break; }

  AggregateSummary out;
  out.quantile_levels = std::move(quantile_levels);
  out.iters.reserve(longest);
  for (const auto& rec : grid_owner->records) out.iters.push_back(rec.iter);
  out.mean_log_l2.resize(static_cast<Index>(longest));
  out.quantiles.resize(static_cast<Index>(out.quantile_levels.size()),
                       static_cast<Index>(longest));

  std::vector<double> sample(trajectories.size());
  for (std::size_t k = 0; k < longest; ++k) {
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
      const auto& recs = trajectories[j].records;
      const auto idx = std::min(k, recs.size() - 1);  // hold last after stopping
      sample[j] = log_error(recs[idx].l2_error);
    }
    out.mean_log_l2[static_cast<Index>(k)] =
        std::accumulate(sample.begin(), sample.end(), 0.0) /
        static_cast<double>(sample.size());
    std::sort(sample.begin(), sample.end());
    for (std::size_t q = 0; q < out.quantile_levels.size(); ++q)
      out.quantiles(static_cast<Index>(q), static_cast<Index>(k)) =
          quantile_sorted(sample, out.quantile_levels[q]);
  }
  return out;
}

namespace {

void append_double(std::string& line, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  line += ',';
  line += buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<Index>& support) {
  if (traj.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  const Index L = traj.records.front().group_magnitudes.size();
  std::string header = "iter,loss,val_loss,l2_error,linf_on,linf_off";
  for (Index l = 0; l < L; ++l) header += ",mag_" + std::to_string(l);
  for (const Index l : support) header += ",align_" + std::to_string(l);
  os << header << '\n';
  for (const auto& rec : traj.records) {
    std::string line = std::to_string(rec.iter);
    append_double(line, rec.loss);
    append_double(line, rec.val_loss);
    append_double(line, rec.l2_error);
    append_double(line, rec.linf_on);
    append_double(line, rec.linf_off);
    for (Index l = 0; l < L; ++l) append_double(line, rec.group_magnitudes[l]);
    for (Index k = 0; k < rec.alignments.size(); ++k)
      append_double(line, rec.alignments[k]);
    os << line << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<Index>& support) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_trajectory_csv(os, traj, support);
  if (!os) throw std::runtime_error("write failed for " + path);
}

void write_aggregate_csv(std::ostream& os, const AggregateSummary& summary) {
  std::string header = "iter,mean_log_l2";
  for (const double q : summary.quantile_levels) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q%02d", static_cast<int>(std::lround(q * 100)));
    header += ',';
    header += buf;
  }
  os << header << '\n';
  for (std::size_t k = 0; k < summary.iters.size(); ++k) {
    std::string line = std::to_string(summary.iters[k]);
    append_double(line, summary.mean_log_l2[static_cast<Index>(k)]);
    for (Index q = 0; q < summary.quantiles.rows(); ++q)
      append_double(line, summary.quantiles(q, static_cast<Index>(k)));
    os << line << '\n';
  }
}

void write_aggregate_csv(const std::string& path, const AggregateSummary& summary) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_aggregate_csv(os, summary);
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace igs
