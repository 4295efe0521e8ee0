#include "cml/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cml/random.hpp"

namespace cml {
namespace {

double inflation(double k, double s_x, double log_term) {
  const double f = 1.0 + std::sqrt(s_x / k) + std::sqrt(2.0 * log_term / k);
  return f * f;
}

std::string format6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

void BoundInputs::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("k must be positive");
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(s_x > 0.0)) throw std::invalid_argument("s_x must be positive");
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be non-negative");
  if (d < 0) throw std::invalid_argument("d must be non-negative");
  if (d > 0 && s_x > static_cast<double>(d)) throw std::invalid_argument("s_x exceeds d");
}

double generalisation_bound(const BoundInputs& b) {
  b.validate();
  const double k = b.k;
  const double n = b.n;
  const double log2eps = std::log(2.0 / b.eps);
  return 2.0 * b.rho * std::sqrt(k / n) * inflation(k, b.s_x, log2eps) +
         std::sqrt(log2eps / (2.0 * n));
}

double excess_empirical_bound(const BoundInputs& b) {
  b.validate();
  return b.rho * inflation(b.k, b.s_x, std::log(1.0 / b.eps));
}

double ambient_bound(const BoundInputs& b) {
  b.validate();
  if (b.d < 1) throw std::invalid_argument("ambient_bound: d must be set");
  const double n = b.n;
  return 2.0 * b.rho * std::sqrt(b.d / n) + std::sqrt(std::log(1.0 / b.eps) / (2.0 * n));
}

double rademacher_chain_bound(int k, int n, double s_x, double eps) {
  BoundInputs{k, n, s_x, 1.0, eps, 0}.validate();
  return std::sqrt(static_cast<double>(k) / n) * inflation(k, s_x, std::log(1.0 / eps));
}

double rademacher_draw_sup(const Eigen::MatrixXd& projected_diffs, std::span<const double> signs,
                           double diam_ref, bool* nonpositive) {
  if (static_cast<Eigen::Index>(signs.size()) != projected_diffs.rows())
    throw std::invalid_argument("rademacher_draw_sup: sign count does not match pair count");
  const Eigen::Map<const Eigen::VectorXd> s(signs.data(), static_cast<Eigen::Index>(signs.size()));
  const Eigen::MatrixXd weighted = s.asDiagonal() * projected_diffs;
  const Eigen::MatrixXd scatter = projected_diffs.transpose() * weighted;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
  double positive = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) > cutoff) positive += lambda(i);
  if (nonpositive) *nonpositive = !(positive > 0.0);
  return positive / (diam_ref * diam_ref);
}

RademacherEstimate rademacher_estimate_mc(const PairSet& pairs, const Projection& r, double diam_ref,
                                          int num_sigma_draws, std::uint64_t seed) {
  if (pairs.size() == 0) throw std::invalid_argument("rademacher_estimate_mc: no pairs");
  if (pairs.dim() != r.d) throw std::invalid_argument("projection and pair dimensions differ");
  if (!(diam_ref > 0.0)) throw std::invalid_argument("diam_ref must be positive");
  if (num_sigma_draws < 2) throw std::invalid_argument("num_sigma_draws must be at least 2");

  const Eigen::MatrixXd v = apply_projection(r, pairs.differences());
  const auto n = static_cast<std::size_t>(pairs.size());
  RademacherEstimate out;
  out.per_draw.reserve(static_cast<std::size_t>(num_sigma_draws));
  std::vector<double> signs(n);
  for (int t = 0; t < num_sigma_draws; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    for (auto& sgn : signs) sgn = (rng.next() >> 63) ? 1.0 : -1.0;
    bool nonpos = false;
    out.per_draw.push_back(rademacher_draw_sup(v, signs, diam_ref, &nonpos) / static_cast<double>(n));
    if (nonpos) ++out.nonpositive_draws;
  }
  double mean = 0.0;
  for (double x : out.per_draw) mean += x;
  mean /= num_sigma_draws;
  double ss = 0.0;
  for (double x : out.per_draw) ss += (x - mean) * (x - mean);
  out.estimate = {mean, std::sqrt(ss / (num_sigma_draws - 1)) / std::sqrt(double(num_sigma_draws)),
                  num_sigma_draws};
  return out;
}

std::vector<TradeoffRow> tradeoff_table(std::span<const int> k_grid, int n, double s_x, double rho,
                                        double eps, int d) {
  if (k_grid.empty()) throw std::invalid_argument("tradeoff_table: empty k grid");
  std::vector<TradeoffRow> rows;
  rows.reserve(k_grid.size());
  for (int k : k_grid) {
    const BoundInputs b{k, n, s_x, rho, eps, d};
    rows.push_back({k, generalisation_bound(b), excess_empirical_bound(b),
                    d > 0 ? ambient_bound(b) : 0.0});
  }
  return rows;
}

std::string tradeoff_csv(std::span<const TradeoffRow> rows) {
  std::string out = "k,generalisation_bound,excess_empirical_bound,ambient_bound\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + format6(r.generalisation) + "," + format6(r.excess) + "," +
           format6(r.ambient) + "\n";
  }
  return out;
}

}  // namespace cml
