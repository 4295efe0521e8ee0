#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "cml/geometry.hpp"

namespace cml {

enum class ScaleMode {
  unit_variance,   // entries N(0, 1)
  inv_k_variance,  // entries N(0, 1/k)
};

std::string_view to_string(ScaleMode mode);

/// Gaussian random projection R in R^{k x d}.
///
/// The matrix is a pure function of (k, d, seed, scale_mode): entries are read
/// row by row from `Rng(seed).normal()` and, for inv_k_variance, multiplied by
/// 1/sqrt(k). The two scalings therefore share the same underlying draw.
struct Projection {
  Eigen::MatrixXd matrix;
  int k = 0;
  int d = 0;
  ScaleMode scale_mode = ScaleMode::inv_k_variance;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument("projection dimension exceeds ambient dimension")
/// when k > d, and on non-positive dimensions.
Projection sample_projection(int k, int d, ScaleMode scale_mode, std::uint64_t seed);

Eigen::VectorXd apply_projection(const Projection& r, const Eigen::VectorXd& x);

/// Projects every row of `rows` (n x d) and returns the n x k result.
Eigen::MatrixXd apply_projection(const Projection& r, const Eigen::MatrixXd& rows);

PointSet apply_projection(const Projection& r, const PointSet& t);

struct GordonCheck {
  double violation_fraction = 0.0;
  double theoretical_bound = 0.0;  // exp(-eps^2 / (2 b^2)); 0 when b = 0
  double rhs_used = 0.0;           // b a(k) + omega_hat + eps
  double b = 0.0;                  // max_{x in T} ||x||
  WidthEstimate omega_hat;
  int num_draws = 0;
};

/// Empirical check of sup_{x in T} ||Rx|| <= b a(k) + omega(T) + eps for
/// unit-variance R.
///
/// omega(T) is estimated once with `width_samples` draws (substream 0 of
/// seed); projection j uses seed mix_seed(seed, j + 1).
GordonCheck gordon_tail_check(const PointSet& t, int k, double epsilon, int num_draws,
                              int width_samples, std::uint64_t seed);

}  // namespace cml
