#include "igs/synthesis.hpp"

#include <Eigen/QR>

#include <cstring>
#include <fstream>

#include "igs/rng.hpp"

namespace igs {

MatrixXd generate_design(Index n, const GroupPartition& part, DesignDist dist,
                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_design: n must be >= 1");
  Rng rng(seed);
  MatrixXd X(n, part.dim());
  // Row-major fill order, fixed so a given seed always yields the same matrix.
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < part.dim(); ++j)
      X(i, j) = dist == DesignDist::Rademacher ? rng.rademacher() : rng.gaussian();
  return X;
}

MatrixXd orthogonal_design(const GroupPartition& part, std::uint64_t seed) {
  const Index n = part.dim();
  Rng rng(seed);
  MatrixXd A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.gaussian();
  Eigen::HouseholderQR<MatrixXd> qr(A);
  MatrixXd Q = qr.householderQ();
  return std::sqrt(static_cast<double>(n)) * Q;
}

GroundTruth generate_signal(const GroupPartition& part,
                            const std::vector<Index>& support,
                            const VectorXd& values) {
  Index total = 0;
  for (const Index l : support) {
    if (l < 0 || l >= part.num_groups())
      throw std::invalid_argument("generate_signal: support group out of range");
    total += part.size(l);
  }
  if (values.size() != total)
    throw std::invalid_argument("generate_signal: values length != supported coordinates");
  VectorXd w = VectorXd::Zero(part.dim());
  Index pos = 0;
  for (const Index l : support) {
    part.seg(w, l) = values.segment(pos, part.size(l));
    pos += part.size(l);
  }
  return decompose(w, part);
}

VectorXd generate_noise(Index n, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("generate_noise: sigma must be >= 0");
  if (sigma == 0) return VectorXd::Zero(n);
  Rng rng(seed);
  return sigma * rng.gaussian_vector(n);
}

Problem observe(MatrixXd X, const GroupPartition& part, GroundTruth truth,
                VectorXd noise, std::uint64_t seed) {
  if (X.cols() != part.dim() || truth.w_star.size() != part.dim() ||
      noise.size() != X.rows())
    throw std::invalid_argument("observe: dimension mismatch");
  Problem prob{std::move(X), VectorXd(), part, std::move(truth), std::move(noise), seed};
  prob.y = prob.X * prob.truth->w_star + *prob.noise;
  return prob;
}

namespace {

// Power iteration for the top eigenvalue of the PSD operator x -> apply(x).
template <class Apply>
double top_eig_psd(Index dim, const Apply& apply) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxSweeps = 10000;
  VectorXd x(dim);
  for (Index i = 0; i < dim; ++i)
    x[i] = 1.0 + 1e-3 * static_cast<double>(i);  // deterministic, not axis-aligned
  x.normalize();
  double lambda = 0;
  for (int it = 0; it < kMaxSweeps; ++it) {
    VectorXd y = apply(x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    const double next = y.dot(apply(y));
    const bool done = std::abs(next - lambda) <= kTol * std::max(1.0, std::abs(next));
    lambda = next;
    x = std::move(y);
    if (done) break;
  }
  return std::max(lambda, 0.0);
}

}  // namespace

double sym_operator_norm(const MatrixXd& A) {
  // ||A||_2 = sqrt(top eigenvalue of A^2) for symmetric A; going through A^2
  // avoids the sign ambiguity of plain power iteration.
  return std::sqrt(top_eig_psd(A.cols(), [&](const VectorXd& x) {
    return (A * (A * x)).eval();
  }));
}

double spectral_norm(const MatrixXd& M) {
  return std::sqrt(top_eig_psd(M.cols(), [&](const VectorXd& x) {
    return (M.transpose() * (M * x)).eval();
  }));
}

CoherenceReport coherence(const MatrixXd& X, const GroupPartition& part,
                          bool want_per_pair) {
  if (X.rows() < 1 || X.cols() != part.dim())
    throw std::invalid_argument("coherence: empty or mismatched design");
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  const Index L = part.num_groups();
  CoherenceReport report;
  if (want_per_pair) report.per_pair = MatrixXd::Zero(L, L);
  for (Index l = 0; l < L; ++l) {
    const auto Xl = part.block(X, l);
    MatrixXd G = inv_n * (Xl.transpose() * Xl);
    G.diagonal().array() -= 1.0;
    const double din = sym_operator_norm(G);
    report.delta_in = std::max(report.delta_in, din);
    if (report.per_pair) (*report.per_pair)(l, l) = din;
    for (Index m = l + 1; m < L; ++m) {
      const MatrixXd C = inv_n * (Xl.transpose() * part.block(X, m));
      const double dout = spectral_norm(C);
      report.delta_out = std::max(report.delta_out, dout);
      if (report.per_pair) {
        (*report.per_pair)(l, m) = dout;
        (*report.per_pair)(m, l) = dout;
      }
    }
  }
  return report;
}

double noise_linf(const MatrixXd& X, const VectorXd& xi) {
  if (xi.size() != X.rows()) throw std::invalid_argument("noise_linf: dimension mismatch");
  return ((X.transpose() * xi) / static_cast<double>(X.rows()))
      .cwiseAbs()
      .maxCoeff();
}

namespace {

constexpr char kMagic[4] = {'I', 'G', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
void write_vec(std::ostream& os, const VectorXd& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(sizeof(double)) * v.size());
}
VectorXd read_vec(std::istream& is, Index n) {
  VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double)) * n);
  return v;
}

}  // namespace

void save_problem(const std::string& path, const Problem& problem) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_problem: cannot open " + path);
  os.write(kMagic, 4);
  std::uint32_t version = kVersion;
  os.write(reinterpret_cast<const char*>(&version), sizeof(version));
  write_u64(os, static_cast<std::uint64_t>(problem.n()));
  write_u64(os, static_cast<std::uint64_t>(problem.p()));
  write_u64(os, static_cast<std::uint64_t>(problem.partition.num_groups()));
  for (const Index s : problem.partition.sizes())
    write_u64(os, static_cast<std::uint64_t>(s));
  write_u64(os, problem.seed);
  const std::uint64_t flags = (problem.truth ? 1u : 0u) | (problem.noise ? 2u : 0u);
  write_u64(os, flags);
  // Column-major payload: X, then y, then the optional blocks.
  os.write(reinterpret_cast<const char*>(problem.X.data()),
           static_cast<std::streamsize>(sizeof(double)) * problem.X.size());
  write_vec(os, problem.y);
  if (problem.truth) write_vec(os, problem.truth->w_star);
  if (problem.noise) write_vec(os, *problem.noise);
  if (!os) throw std::runtime_error("save_problem: write failed for " + path);
}

Problem load_problem(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_problem: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw std::runtime_error("load_problem: bad header in " + path);
  const auto n = static_cast<Index>(read_u64(is));
  const auto p = static_cast<Index>(read_u64(is));
  const auto L = static_cast<Index>(read_u64(is));
  std::vector<Index> sizes(static_cast<std::size_t>(L));
  for (auto& s : sizes) s = static_cast<Index>(read_u64(is));
  const std::uint64_t seed = read_u64(is);
  const std::uint64_t flags = read_u64(is);
  GroupPartition part(sizes);
  if (part.dim() != p) throw std::runtime_error("load_problem: inconsistent sizes");
  MatrixXd X(n, p);
  is.read(reinterpret_cast<char*>(X.data()),
          static_cast<std::streamsize>(sizeof(double)) * X.size());
  Problem prob{std::move(X), read_vec(is, n), part, std::nullopt, std::nullopt, seed};
  if (flags & 1u) prob.truth = decompose(read_vec(is, p), part);
  if (flags & 2u) prob.noise = read_vec(is, n);
  if (!is) throw std::runtime_error("load_problem: truncated file " + path);
  return prob;
}

}  // namespace igs
