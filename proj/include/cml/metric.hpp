#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cml/data.hpp"
#include "cml/projection.hpp"

namespace cml {

/// Parameters of the bounded distance loss: slope rho, thresholds 0 < l < u.
struct LossParams {
  double rho = 1.0;
  double l = 0.4;
  double u = 0.6;

  /// Throws std::invalid_argument unless rho > 0 and 0 < l < u.
  void validate() const;
};

/// min{1, rho (sq_dist - u)_+} for same-label pairs,
/// min{1, rho (l - sq_dist)_+} otherwise.
double loss(double sq_dist, bool same_label, const LossParams& p);

/// Quantile defaults from squared pair distances under the initial metric:
/// l = 40th percentile, u = 60th percentile (linear interpolation),
/// rho = 2 / (u - l). Nudged apart when the quantiles coincide.
LossParams default_loss_params(std::span<const double> sq_dists);

/// Mahalanobis map M with sigma_max(M) = 1 / diam_ref.
struct Metric {
  Eigen::MatrixXd matrix;
  double diam_ref = 1.0;

  Eigen::Index dim() const { return matrix.cols(); }
};

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

/// Rescales m_raw so that sigma_max = 1 / diam_ref. Throws
/// std::invalid_argument("degenerate metric") for a zero matrix.
Metric spectral_normalize(const Eigen::MatrixXd& m_raw, double diam_ref);

/// Identity scaled to the feasible set: (1 / diam_ref) I_m.
Metric identity_metric(Eigen::Index m, double diam_ref);

/// Training pairs (x_{2i-1}, x_{2i}) with their same-label indicator.
struct PairSet {
  Eigen::MatrixXd first;   // n x dim
  Eigen::MatrixXd second;  // n x dim
  std::vector<std::uint8_t> same_label;

  Eigen::Index size() const { return first.rows(); }
  Eigen::Index dim() const { return first.cols(); }

  /// first - second, one pair per row.
  Eigen::MatrixXd differences() const { return first - second; }
};

/// Shuffles instance indices with `seed` and pairs consecutive entries.
/// floor(n / 2) pairs; an odd instance out is dropped.
PairSet make_pairs(const LabeledDataset& ds, std::uint64_t seed);

/// Pairs (order[0], order[1]), (order[2], order[3]), ...
PairSet make_pairs(const LabeledDataset& ds, std::span<const std::size_t> order);

/// Same pairs with every point mapped through R.
PairSet project_pairs(const PairSet& pairs, const Projection& r);

/// ||M (x - x')||^2 per pair.
std::vector<double> pair_sq_distances(const Metric& m, const PairSet& pairs);

/// Mean loss over pairs of ||M (x - x')||^2.
double empirical_error(const Metric& m, const PairSet& pairs, const LossParams& p);

/// Mean loss over pairs of ||M R (x - x')||^2 (pairs given in ambient space).
double empirical_error(const Metric& m, const PairSet& pairs, const LossParams& p,
                       const Projection& r);

enum class TrainerKind { pairwise_erm, lmnn };

std::string_view to_string(TrainerKind kind);

struct TrainConfig {
  int max_epochs = 200;
  double step_size = 0.1;
  int batch_size = 64;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  TrainerKind algorithm = TrainerKind::pairwise_erm;
  int lmnn_neighbors = 3;
  double lmnn_margin = 1.0;
  double lmnn_pull_weight = 0.5;
  int lmnn_impostor_refresh = 10;

  void validate() const;
};

enum class TrainStatus { ok, degenerate_input };

struct TrainResult {
  Metric metric;
  TrainStatus status = TrainStatus::ok;
  int epochs = 0;
  double objective = 0.0;  // training empirical error (ERM) or LMNN objective
  std::vector<double> history;  // per-epoch objective; LMNN records accepted steps only
};

/// Mini-batch normalized subgradient descent on the empirical error,
/// starting from the scaled identity and rescaling to the feasible set after
/// every step. Returns the iterate with the lowest training error.
///
/// Internally the pair differences are divided by diam_ref so the iterate has
/// unit spectral norm; step_size is therefore dimensionless. The step at
/// epoch t is step_size / sqrt(t). Training stops after max_epochs, at zero
/// error, or when 20 consecutive epochs fail to improve the best error by
/// more than tolerance.
TrainResult train_pairwise(const PairSet& pairs, const LossParams& p, const TrainConfig& cfg,
                           double diam_ref);

/// Large-margin nearest neighbour on the linear map L, followed by
/// spectral_normalize. Features are divided by diam_ref first, so the margin
/// is in normalized squared-distance units.
///
/// objective(L) = [(1 - mu) sum_{i, j~i} ||L(x_i - x_j)||^2
///                 + mu sum_{i, j~i, l} [margin + ||L(x_i - x_j)||^2 - ||L(x_i - x_l)||^2]_+]
///                / (n K)
///
/// with target neighbours j~i fixed from the Euclidean metric and impostor
/// candidates l refreshed every lmnn_impostor_refresh epochs. Full-batch
/// gradient steps with backtracking: a step is accepted only when the
/// objective does not increase.
TrainResult train_lmnn(const LabeledDataset& ds, const TrainConfig& cfg, double diam_ref);

/// LMNN objective of the map L on features already divided by diam_ref.
/// Exposed for tests; uses every differently-labelled point as a candidate.
double lmnn_objective(const Eigen::MatrixXd& l, const LabeledDataset& scaled, const TrainConfig& cfg);

}  // namespace cml
