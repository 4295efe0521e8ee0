#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace cml {

/// Finite set of points in R^d, one point per row.
struct PointSet {
  Eigen::MatrixXd points;

  PointSet() = default;
  explicit PointSet(Eigen::MatrixXd rows) : points(std::move(rows)) {}

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  bool empty() const { return points.rows() == 0; }
};

/// Monte Carlo estimate with its standard error.
struct WidthEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int num_samples = 0;
};

inline constexpr int kDefaultWidthSamples = 5000;
inline constexpr std::size_t kDefaultMaxPairs = 100000;

/// Estimates the Gaussian width E sup_{x in T} g'x.
///
/// Draw i uses g ~ N(0, I_d) from substream (seed, i), so two sets of the
/// same dimension evaluated with the same seed see the same Gaussian vectors.
/// Throws std::invalid_argument on an empty set or num_samples < 2.
WidthEstimate gaussian_width_mc(const PointSet& t, int num_samples, std::uint64_t seed);

/// Estimates psi(T) = sqrt(E sup_{x in T} (g'x)^2). The standard error is
/// propagated from the mean of the squared sups by the delta method.
WidthEstimate squared_width_mc(const PointSet& t, int num_samples, std::uint64_t seed);

/// Estimates omega(T - T) over the full difference set, using
/// sup_{x,x'} g'(x - x') = max_x g'x - min_x g'x.
WidthEstimate difference_width_mc(const PointSet& t, int num_samples, std::uint64_t seed);

/// Estimates psi(T - T) over the full difference set (same identity, squared).
WidthEstimate difference_squared_width_mc(const PointSet& t, int num_samples,
                                          std::uint64_t seed);

/// T - T as an explicit point set. Returns the zero vector followed by every
/// ordered difference x_i - x_j (i != j) when that fits in max_pairs, and
/// otherwise the zero vector plus max_pairs - 1 distinct ordered differences
/// drawn uniformly without replacement.
PointSet difference_set(const PointSet& t, std::size_t max_pairs, std::uint64_t seed);

/// Largest pairwise Euclidean distance, by exhaustive scan.
double diameter(const PointSet& t);

/// Estimates s(T) = psi(T - T)^2 / diam(T)^2.
///
/// psi(T - T) is taken over the complete difference set through the range
/// identity above, which is exact per Gaussian draw and costs O(n d) instead
/// of O(n^2 d). Throws std::invalid_argument("degenerate set") when the
/// diameter is zero.
WidthEstimate stable_dimension_mc(const PointSet& t, int num_samples, std::uint64_t seed);

/// Closed-form stable dimension of the ellipsoid A S^{d-1}:
/// sum(sigma_i^2) / max(sigma_i)^2.
double ellipsoid_stable_dimension(std::span<const double> singular_values);

/// a(k) = E||z||, z ~ N(0, I_k), evaluated as sqrt(2) Gamma((k+1)/2) / Gamma(k/2)
/// in log space.
double expected_norm_a(int k);

}  // namespace cml
