#include "cml/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "cml/random.hpp"

namespace cml {
namespace {

double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

// d loss / d sq_dist, taking 0 at the kinks.
double loss_slope(double sq_dist, bool same_label, const LossParams& p) {
  if (same_label) {
    const double z = p.rho * (sq_dist - p.u);
    return (z > 0.0 && z < 1.0) ? p.rho : 0.0;
  }
  const double z = p.rho * (p.l - sq_dist);
  return (z > 0.0 && z < 1.0) ? -p.rho : 0.0;
}

double mean_loss(const Eigen::MatrixXd& diffs, const Eigen::MatrixXd& map,
                 const std::vector<std::uint8_t>& same, const LossParams& p) {
  const Eigen::VectorXd sq = (diffs * map.transpose()).rowwise().squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < sq.size(); ++i)
    total += loss(sq(i), same[static_cast<std::size_t>(i)] != 0, p);
  return total / static_cast<double>(sq.size());
}

}  // namespace

void LossParams::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("loss: rho must be positive");
  if (!(l > 0.0 && l < u)) throw std::invalid_argument("loss: need 0 < l < u");
}

double loss(double sq_dist, bool same_label, const LossParams& p) {
  const double excess = same_label ? sq_dist - p.u : p.l - sq_dist;
  return std::min(1.0, p.rho * std::max(excess, 0.0));
}

LossParams default_loss_params(std::span<const double> sq_dists) {
  if (sq_dists.empty()) throw std::invalid_argument("default_loss_params: no distances");
  std::vector<double> xs(sq_dists.begin(), sq_dists.end());
  double l = quantile(xs, 0.4);
  double u = quantile(xs, 0.6);
  const double largest = *std::max_element(xs.begin(), xs.end());
  const double scale = largest > 0.0 ? largest : 1.0;
  if (!(l > 0.0)) l = 1e-6 * scale;
  if (!(u > l)) u = l + 1e-6 * scale;
  return {2.0 / (u - l), l, u};
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = m.rows() < m.cols() ? Eigen::MatrixXd(m * m.transpose())
                                                   : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
}

Metric spectral_normalize(const Eigen::MatrixXd& m_raw, double diam_ref) {
  if (!(diam_ref > 0.0)) throw std::invalid_argument("spectral_normalize: diam_ref must be positive");
  if (m_raw.rows() != m_raw.cols()) throw std::invalid_argument("spectral_normalize: metric must be square");
  const double sigma = spectral_norm(m_raw);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("degenerate metric");
  return {m_raw / (diam_ref * sigma), diam_ref};
}

Metric identity_metric(Eigen::Index m, double diam_ref) {
  return spectral_normalize(Eigen::MatrixXd::Identity(m, m), diam_ref);
}

PairSet make_pairs(const LabeledDataset& ds, std::span<const std::size_t> order) {
  if (order.size() < 2) throw std::invalid_argument("make_pairs: need at least 2 points");
  const std::size_t n = order.size() / 2;
  PairSet out;
  out.first.resize(static_cast<Eigen::Index>(n), ds.dim());
  out.second.resize(static_cast<Eigen::Index>(n), ds.dim());
  out.same_label.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = order[2 * i];
    const std::size_t b = order[2 * i + 1];
    out.first.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(a));
    out.second.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(b));
    out.same_label[i] = ds.labels[a] == ds.labels[b] ? 1 : 0;
  }
  return out;
}

PairSet make_pairs(const LabeledDataset& ds, std::uint64_t seed) {
  if (ds.size() < 2) throw std::invalid_argument("make_pairs: need at least 2 points");
  Rng rng(seed);
  const auto order = permutation(static_cast<std::size_t>(ds.size()), rng);
  return make_pairs(ds, order);
}

PairSet project_pairs(const PairSet& pairs, const Projection& r) {
  return {apply_projection(r, pairs.first), apply_projection(r, pairs.second), pairs.same_label};
}

std::vector<double> pair_sq_distances(const Metric& m, const PairSet& pairs) {
  if (m.dim() != pairs.dim()) throw std::invalid_argument("metric and pair dimensions differ");
  const Eigen::VectorXd sq = (pairs.differences() * m.matrix.transpose()).rowwise().squaredNorm();
  return {sq.data(), sq.data() + sq.size()};
}

double empirical_error(const Metric& m, const PairSet& pairs, const LossParams& p) {
  if (m.dim() != pairs.dim()) throw std::invalid_argument("metric and pair dimensions differ");
  if (pairs.size() == 0) throw std::invalid_argument("empirical_error: no pairs");
  return mean_loss(pairs.differences(), m.matrix, pairs.same_label, p);
}

double empirical_error(const Metric& m, const PairSet& pairs, const LossParams& p,
                       const Projection& r) {
  if (pairs.dim() != r.d) throw std::invalid_argument("projection and pair dimensions differ");
  if (m.dim() != r.k) throw std::invalid_argument("metric and projection dimensions differ");
  if (pairs.size() == 0) throw std::invalid_argument("empirical_error: no pairs");
  return mean_loss(apply_projection(r, pairs.differences()), m.matrix, pairs.same_label, p);
}

std::string_view to_string(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::pairwise_erm: return "pairwise_erm";
    case TrainerKind::lmnn: return "lmnn";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be non-negative");
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (lmnn_neighbors < 1) throw std::invalid_argument("lmnn_neighbors must be positive");
  if (!(lmnn_margin > 0.0)) throw std::invalid_argument("lmnn_margin must be positive");
  if (!(lmnn_pull_weight >= 0.0 && lmnn_pull_weight <= 1.0))
    throw std::invalid_argument("lmnn_pull_weight must lie in [0, 1]");
  if (lmnn_impostor_refresh < 1) throw std::invalid_argument("lmnn_impostor_refresh must be positive");
}

TrainResult train_pairwise(const PairSet& pairs, const LossParams& p, const TrainConfig& cfg,
                           double diam_ref) {
  cfg.validate();
  p.validate();
  if (pairs.size() == 0) throw std::invalid_argument("train_pairwise: no pairs");
  if (!(diam_ref > 0.0)) throw std::invalid_argument("train_pairwise: diam_ref must be positive");

  const Eigen::Index m = pairs.dim();
  const Eigen::Index n = pairs.size();
  const Eigen::MatrixXd diffs = pairs.differences() / diam_ref;

  TrainResult result;
  Eigen::MatrixXd current = Eigen::MatrixXd::Identity(m, m);
  if (diffs.cwiseAbs().maxCoeff() == 0.0) {
    result.metric = spectral_normalize(current, diam_ref);
    result.status = TrainStatus::degenerate_input;
    result.objective = mean_loss(diffs, current, pairs.same_label, p);
    return result;
  }

  Eigen::MatrixXd best = current;
  double best_error = mean_loss(diffs, current, pairs.same_label, p);
  result.history.push_back(best_error);

  Rng rng(cfg.seed);
  const auto batch = static_cast<Eigen::Index>(cfg.batch_size);
  int stale = 0;
  constexpr int kPatience = 20;
  int epoch = 0;
  while (epoch < cfg.max_epochs && best_error > 0.0 && stale < kPatience) {
    ++epoch;
    const double step = cfg.step_size / std::sqrt(static_cast<double>(epoch));
    const auto order = permutation(static_cast<std::size_t>(n), rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index end = std::min(n, start + batch);
      Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index r = start; r < end; ++r) {
        const auto idx = static_cast<Eigen::Index>(order[static_cast<std::size_t>(r)]);
        const Eigen::VectorXd delta = diffs.row(idx).transpose();
        const double sq = (current * delta).squaredNorm();
        const double slope = loss_slope(sq, pairs.same_label[static_cast<std::size_t>(idx)] != 0, p);
        if (slope != 0.0) weighted.noalias() += slope * delta * delta.transpose();
      }
      const Eigen::MatrixXd grad = 2.0 * current * weighted / static_cast<double>(end - start);
      const double gnorm = grad.norm();
      if (gnorm == 0.0) continue;
      const Eigen::MatrixXd next = current - (step / gnorm) * grad;
      const double sigma = spectral_norm(next);
      if (!(sigma > 0.0) || !std::isfinite(sigma)) continue;
      current = next / sigma;
    }
    const double err = mean_loss(diffs, current, pairs.same_label, p);
    result.history.push_back(err);
    if (err < best_error - cfg.tolerance) {
      stale = 0;
    } else {
      ++stale;
    }
    if (err < best_error) {
      best_error = err;
      best = current;
    }
  }

  result.metric = spectral_normalize(best, diam_ref);
  result.epochs = epoch;
  result.objective = best_error;
  return result;
}

namespace {

class LmnnProblem {
 public:
  LmnnProblem(const Eigen::MatrixXd& x, const std::vector<int>& labels, const TrainConfig& cfg)
      : x_(x), labels_(labels), cfg_(cfg), n_(x.rows()), k_(cfg.lmnn_neighbors) {
    find_targets();
  }

  // Every differently-labelled point is an impostor candidate.
  void use_all_candidates() {
    candidates_.clear();
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index l = 0; l < n_; ++l)
        if (labels_[idx(i)] != labels_[idx(l)]) candidates_.emplace_back(i, l);
  }

  // Candidates are impostors that are within margin of the farthest target.
  void refresh_candidates(const Eigen::MatrixXd& map) {
    const Eigen::MatrixXd y = x_ * map.transpose();
    candidates_.clear();
    for (Eigen::Index i = 0; i < n_; ++i) {
      double reach = 0.0;
      for (int a = 0; a < k_; ++a)
        reach = std::max(reach, (y.row(i) - y.row(targets_(i, a))).squaredNorm());
      reach += cfg_.lmnn_margin;
      for (Eigen::Index l = 0; l < n_; ++l) {
        if (labels_[idx(i)] == labels_[idx(l)]) continue;
        if ((y.row(i) - y.row(l)).squaredNorm() < reach) candidates_.emplace_back(i, l);
      }
    }
  }

  double evaluate(const Eigen::MatrixXd& map, Eigen::MatrixXd* grad) const {
    const double mu = cfg_.lmnn_pull_weight;
    const double margin = cfg_.lmnn_margin;
    const Eigen::MatrixXd y = x_ * map.transpose();
    Eigen::MatrixXd target_sq(n_, k_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (int a = 0; a < k_; ++a) target_sq(i, a) = (y.row(i) - y.row(targets_(i, a))).squaredNorm();

    Eigen::MatrixXd w;
    if (grad) w = Eigen::MatrixXd::Zero(n_, n_);
    double pull = target_sq.sum();
    double push = 0.0;
    if (grad && mu < 1.0) {
      for (Eigen::Index i = 0; i < n_; ++i)
        for (int a = 0; a < k_; ++a) w(i, targets_(i, a)) += 1.0 - mu;
    }
    if (mu > 0.0) {
      for (const auto& [i, l] : candidates_) {
        const double d_il = (y.row(i) - y.row(l)).squaredNorm();
        for (int a = 0; a < k_; ++a) {
          const double h = margin + target_sq(i, a) - d_il;
          if (h <= 0.0) continue;
          push += h;
          if (grad) {
            w(i, targets_(i, a)) += mu;
            w(i, l) -= mu;
          }
        }
      }
    }
    const double scale = 1.0 / static_cast<double>(n_ * k_);
    if (grad) {
      const Eigen::VectorXd degree = w.rowwise().sum() + w.colwise().sum().transpose();
      const Eigen::MatrixXd wx = w * x_;
      Eigen::MatrixXd c = x_.transpose() * degree.asDiagonal() * x_;
      c -= x_.transpose() * wx;
      c -= wx.transpose() * x_;
      *grad = 2.0 * scale * map * c;
    }
    return scale * ((1.0 - mu) * pull + mu * push);
  }

 private:
  std::size_t idx(Eigen::Index i) const { return static_cast<std::size_t>(i); }

  void find_targets() {
    targets_.resize(n_, k_);
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index i = 0; i < n_; ++i) {
      cand.clear();
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (j == i || labels_[idx(j)] != labels_[idx(i)]) continue;
        cand.emplace_back((x_.row(i) - x_.row(j)).squaredNorm(), j);
      }
      std::partial_sort(cand.begin(), cand.begin() + k_, cand.end());
      for (int a = 0; a < k_; ++a) targets_(i, a) = cand[static_cast<std::size_t>(a)].second;
    }
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& labels_;
  const TrainConfig& cfg_;
  Eigen::Index n_;
  int k_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> targets_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> candidates_;
};

void check_class_sizes(const LabeledDataset& ds, int neighbors) {
  std::map<int, int> counts;
  for (int label : ds.labels) ++counts[label];
  for (const auto& [label, count] : counts) {
    if (count < neighbors + 1) {
      throw std::invalid_argument("train_lmnn: class " + std::to_string(label) + " has " +
                                  std::to_string(count) + " points, needs at least " +
                                  std::to_string(neighbors + 1));
    }
  }
}

}  // namespace

double lmnn_objective(const Eigen::MatrixXd& l, const LabeledDataset& scaled, const TrainConfig& cfg) {
  cfg.validate();
  check_class_sizes(scaled, cfg.lmnn_neighbors);
  LmnnProblem problem(scaled.features, scaled.labels, cfg);
  problem.use_all_candidates();
  return problem.evaluate(l, nullptr);
}

TrainResult train_lmnn(const LabeledDataset& ds, const TrainConfig& cfg, double diam_ref) {
  cfg.validate();
  if (!(diam_ref > 0.0)) throw std::invalid_argument("train_lmnn: diam_ref must be positive");
  if (ds.size() < 2) throw std::invalid_argument("train_lmnn: need at least 2 points");
  check_class_sizes(ds, cfg.lmnn_neighbors);

  const Eigen::Index m = ds.dim();
  const Eigen::MatrixXd x = ds.features / diam_ref;
  TrainResult result;
  Eigen::MatrixXd map = Eigen::MatrixXd::Identity(m, m);
  if (x.cwiseAbs().maxCoeff() == 0.0 || (x.rowwise() - x.row(0)).cwiseAbs().maxCoeff() == 0.0) {
    result.metric = spectral_normalize(map, diam_ref);
    result.status = TrainStatus::degenerate_input;
    return result;
  }

  LmnnProblem problem(x, ds.labels, cfg);
  double step = cfg.step_size;
  double f = 0.0;
  Eigen::MatrixXd grad;
  int epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    const bool refresh = epoch % cfg.lmnn_impostor_refresh == 0;
    if (refresh || epoch == 0) {
      problem.refresh_candidates(map);
      f = problem.evaluate(map, &grad);
      if (epoch == 0) result.history.push_back(f);
    }
    if (grad.norm() == 0.0) break;

    bool accepted = false;
    Eigen::MatrixXd next;
    double f_next = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
      next = map - step * grad;
      f_next = problem.evaluate(next, nullptr);
      if (f_next <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double decrease = f - f_next;
    map = next;
    f = problem.evaluate(map, &grad);
    result.history.push_back(f);
    step *= 1.25;
    if (decrease <= cfg.tolerance * std::max(1.0, std::abs(f))) {
      ++epoch;
      break;
    }
  }

  result.epochs = epoch;
  result.objective = f;
  result.metric = spectral_normalize(map, diam_ref);
  return result;
}

}  // namespace cml
