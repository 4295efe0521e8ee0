#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cml/geometry.hpp"
#include "cml/metric.hpp"
#include "cml/projection.hpp"

namespace cml {

/// Inputs shared by the closed-form bounds. `d` is only read by
/// ambient_bound; set it to 0 when unknown.
struct BoundInputs {
  int k = 1;
  int n = 1;
  double s_x = 1.0;
  double rho = 1.0;
  double eps = 0.1;
  int d = 0;

  /// Throws std::invalid_argument unless 0 < eps < 1, k, n >= 1, s_x > 0,
  /// rho >= 0 and (d == 0 or s_x <= d).
  void validate() const;
};

/// Uniform generalisation gap of the compressed class:
/// 2 rho sqrt(k/n) (1 + sqrt(s/k) + sqrt(2 ln(2/eps) / k))^2 + sqrt(ln(2/eps) / (2n)).
double generalisation_bound(const BoundInputs& b);

/// Excess empirical error of the compressed class over the ambient one:
/// rho (1 + sqrt(s/k) + sqrt(2 ln(1/eps) / k))^2.
double excess_empirical_bound(const BoundInputs& b);

/// Ambient-space generalisation gap: 2 rho sqrt(d/n) + sqrt(ln(1/eps) / (2n)).
double ambient_bound(const BoundInputs& b);

/// End point of the Rademacher chain for the compressed class:
/// sqrt(k/n) (1 + sqrt(s/k) + sqrt(2 ln(1/eps) / k))^2.
double rademacher_chain_bound(int k, int n, double s_x, double eps);

/// sup over sigma_max(M) = 1/diam_ref of sum_i signs_i ||M v_i||^2, where the
/// rows of `projected_diffs` are v_i = R(x_{2i-1} - x_{2i}).
///
/// With S = sum_i signs_i v_i v_i', the sup is (1/diam_ref^2) times the sum
/// of the positive eigenvalues of S (eigenvalues below 1e-12 ||S|| count as
/// zero). When S has no positive eigenvalue the constrained sup is <= 0; the
/// function then returns 0 and sets *nonpositive.
double rademacher_draw_sup(const Eigen::MatrixXd& projected_diffs, std::span<const double> signs,
                           double diam_ref, bool* nonpositive = nullptr);

struct RademacherEstimate {
  WidthEstimate estimate;   // mean over sign draws of sup / n
  int nonpositive_draws = 0;
  std::vector<double> per_draw;  // sup / n for each draw
};

/// Conditional (fixed R) Monte Carlo estimate of the empirical Rademacher
/// complexity of {(x, x') -> ||M R (x - x')||^2 : sigma_max(M) = 1/diam_ref}.
/// Draw t uses sign vector substream (seed, t).
RademacherEstimate rademacher_estimate_mc(const PairSet& pairs, const Projection& r, double diam_ref,
                                          int num_sigma_draws, std::uint64_t seed);

struct TradeoffRow {
  int k = 0;
  double generalisation = 0.0;
  double excess = 0.0;
  double ambient = 0.0;
};

std::vector<TradeoffRow> tradeoff_table(std::span<const int> k_grid, int n, double s_x, double rho,
                                        double eps, int d);

/// CSV with header `k,generalisation_bound,excess_empirical_bound,ambient_bound`.
std::string tradeoff_csv(std::span<const TradeoffRow> rows);

}  // namespace cml
