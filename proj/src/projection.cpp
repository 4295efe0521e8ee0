#include "cml/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "cml/random.hpp"

namespace cml {

std::string_view to_string(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::unit_variance: return "unit_variance";
    case ScaleMode::inv_k_variance: return "inv_k_variance";
  }
  return "unknown";
}

Projection sample_projection(int k, int d, ScaleMode scale_mode, std::uint64_t seed) {
  if (k < 1 || d < 1) throw std::invalid_argument("projection dimensions must be positive");
  if (k > d) throw std::invalid_argument("projection dimension exceeds ambient dimension");
  Rng rng(seed);
  Projection r;
  r.matrix = normal_matrix(k, d, rng);
  if (scale_mode == ScaleMode::inv_k_variance) r.matrix /= std::sqrt(static_cast<double>(k));
  r.k = k;
  r.d = d;
  r.scale_mode = scale_mode;
  r.seed = seed;
  return r;
}

Eigen::VectorXd apply_projection(const Projection& r, const Eigen::VectorXd& x) {
  if (x.size() != r.d) throw std::invalid_argument("apply_projection: dimension mismatch");
  return r.matrix * x;
}

Eigen::MatrixXd apply_projection(const Projection& r, const Eigen::MatrixXd& rows) {
  if (rows.cols() != r.d) throw std::invalid_argument("apply_projection: dimension mismatch");
  return rows * r.matrix.transpose();
}

PointSet apply_projection(const Projection& r, const PointSet& t) {
  return PointSet(apply_projection(r, t.points));
}

GordonCheck gordon_tail_check(const PointSet& t, int k, double epsilon, int num_draws,
                              int width_samples, std::uint64_t seed) {
  if (t.empty()) throw std::invalid_argument("empty point set");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (num_draws < 1) throw std::invalid_argument("num_draws must be positive");
  const int d = static_cast<int>(t.dim());

  GordonCheck out;
  out.num_draws = num_draws;
  out.b = t.points.rowwise().norm().maxCoeff();
  out.omega_hat = gaussian_width_mc(t, width_samples, mix_seed(seed, 0));
  out.rhs_used = out.b * expected_norm_a(k) + out.omega_hat.value + epsilon;
  out.theoretical_bound = out.b > 0.0 ? std::exp(-epsilon * epsilon / (2.0 * out.b * out.b)) : 0.0;

  const Eigen::MatrixXd cols = t.points.transpose();
  int violations = 0;
  for (int j = 0; j < num_draws; ++j) {
    const Projection r = sample_projection(k, d, ScaleMode::unit_variance,
                                           mix_seed(seed, static_cast<std::uint64_t>(j) + 1));
    const double sup = (r.matrix * cols).colwise().norm().maxCoeff();
    if (sup > out.rhs_used) ++violations;
  }
  out.violation_fraction = static_cast<double>(violations) / num_draws;
  return out;
}

}  // namespace cml
