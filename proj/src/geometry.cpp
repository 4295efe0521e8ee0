#include "cml/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "cml/random.hpp"

namespace cml {
namespace {

constexpr Eigen::Index kChunk = 256;

void check_inputs(const PointSet& t, int num_samples) {
  if (t.empty()) throw std::invalid_argument("empty point set");
  if (t.dim() < 1) throw std::invalid_argument("point set has zero dimension");
  if (num_samples < 2) throw std::invalid_argument("num_samples must be at least 2");
}

// Evaluates reduce(row of g'x over all x) for every Gaussian draw.
template <class Reduce>
std::vector<double> per_draw(const PointSet& t, int num_samples, std::uint64_t seed,
                             Reduce reduce) {
  const Eigen::Index d = t.dim();
  std::vector<double> out(static_cast<std::size_t>(num_samples));
  Eigen::MatrixXd gauss;
  Eigen::MatrixXd proj;
  for (Eigen::Index start = 0; start < num_samples; start += kChunk) {
    const Eigen::Index rows = std::min<Eigen::Index>(kChunk, num_samples - start);
    gauss.resize(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(start + r)));
      for (Eigen::Index j = 0; j < d; ++j) gauss(r, j) = rng.normal();
    }
    // One column per draw keeps each reduction contiguous.
    proj.noalias() = t.points * gauss.transpose();
    for (Eigen::Index r = 0; r < rows; ++r)
      out[static_cast<std::size_t>(start + r)] = reduce(proj.col(r));
  }
  return out;
}

struct Moments {
  double mean;
  double std_error;
};

Moments moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, sd / std::sqrt(n)};
}

WidthEstimate root_of_mean(const std::vector<double>& squares, int num_samples) {
  const Moments m = moments(squares);
  const double value = std::sqrt(std::max(m.mean, 0.0));
  const double se = value > 0.0 ? m.std_error / (2.0 * value) : 0.0;
  return {value, se, num_samples};
}

}  // namespace

WidthEstimate gaussian_width_mc(const PointSet& t, int num_samples, std::uint64_t seed) {
  check_inputs(t, num_samples);
  const auto sups = per_draw(t, num_samples, seed, [](const auto& row) { return row.maxCoeff(); });
  const Moments m = moments(sups);
  return {m.mean, m.std_error, num_samples};
}

WidthEstimate squared_width_mc(const PointSet& t, int num_samples, std::uint64_t seed) {
  check_inputs(t, num_samples);
  const auto sups = per_draw(t, num_samples, seed, [](const auto& row) {
    return row.cwiseAbs2().maxCoeff();
  });
  return root_of_mean(sups, num_samples);
}

WidthEstimate difference_width_mc(const PointSet& t, int num_samples, std::uint64_t seed) {
  check_inputs(t, num_samples);
  const auto ranges = per_draw(t, num_samples, seed, [](const auto& row) {
    return row.maxCoeff() - row.minCoeff();
  });
  const Moments m = moments(ranges);
  return {m.mean, m.std_error, num_samples};
}

WidthEstimate difference_squared_width_mc(const PointSet& t, int num_samples,
                                          std::uint64_t seed) {
  check_inputs(t, num_samples);
  const auto ranges = per_draw(t, num_samples, seed, [](const auto& row) {
    const double r = row.maxCoeff() - row.minCoeff();
    return r * r;
  });
  return root_of_mean(ranges, num_samples);
}

PointSet difference_set(const PointSet& t, std::size_t max_pairs, std::uint64_t seed) {
  if (t.empty()) throw std::invalid_argument("empty point set");
  if (max_pairs < 1) throw std::invalid_argument("max_pairs must be positive");
  const auto n = static_cast<std::uint64_t>(t.size());
  const std::uint64_t ordered = n * (n - 1);

  std::vector<std::uint64_t> picks;
  if (ordered + 1 <= max_pairs) {
    picks.resize(ordered);
    for (std::uint64_t p = 0; p < ordered; ++p) picks[p] = p;
  } else {
    // Floyd's algorithm: max_pairs - 1 distinct indices out of `ordered`.
    const std::uint64_t want = max_pairs - 1;
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(want * 2);
    for (std::uint64_t j = ordered - want; j < ordered; ++j) {
      const std::uint64_t cand = rng.below(j + 1);
      if (!chosen.insert(cand).second) chosen.insert(j);
    }
    picks.assign(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(picks.size() + 1), t.dim());
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const std::uint64_t i = picks[r] / (n - 1);
    std::uint64_t j = picks[r] % (n - 1);
    if (j >= i) ++j;
    out.row(static_cast<Eigen::Index>(r + 1)) =
        t.points.row(static_cast<Eigen::Index>(i)) - t.points.row(static_cast<Eigen::Index>(j));
  }
  return PointSet(std::move(out));
}

double diameter(const PointSet& t) {
  if (t.empty()) throw std::invalid_argument("empty point set");
  // Column-major copy with one point per column keeps the inner loop contiguous.
  const Eigen::MatrixXd cols = t.points.transpose();
  const Eigen::Index n = cols.cols();
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      best = std::max(best, (cols.col(i) - cols.col(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

WidthEstimate stable_dimension_mc(const PointSet& t, int num_samples, std::uint64_t seed) {
  check_inputs(t, num_samples);
  const double diam = diameter(t);
  if (!(diam > 0.0)) throw std::invalid_argument("degenerate set");
  const auto ranges = per_draw(t, num_samples, seed, [](const auto& row) {
    const double r = row.maxCoeff() - row.minCoeff();
    return r * r;
  });
  const Moments m = moments(ranges);
  const double scale = diam * diam;
  return {m.mean / scale, m.std_error / scale, num_samples};
}

double ellipsoid_stable_dimension(std::span<const double> singular_values) {
  double sum_sq = 0.0;
  double max_sq = 0.0;
  for (double s : singular_values) {
    if (!(s >= 0.0)) throw std::invalid_argument("singular values must be non-negative");
    sum_sq += s * s;
    max_sq = std::max(max_sq, s * s);
  }
  if (!(max_sq > 0.0)) throw std::invalid_argument("degenerate ellipsoid: all singular values are zero");
  return sum_sq / max_sq;
}

double expected_norm_a(int k) {
  if (k < 1) throw std::invalid_argument("expected_norm_a: k must be positive");
  const double half = 0.5 * static_cast<double>(k);
  return std::sqrt(2.0) * std::exp(std::lgamma(half + 0.5) - std::lgamma(half));
}

}  // namespace cml
