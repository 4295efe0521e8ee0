#include "cml/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cml/errors.hpp"
#include "cml/random.hpp"

namespace cml {
namespace {

constexpr std::array<double, kLabelWeightCount> kLabelWeights = {
#include "label_weights.inc"
};

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

void Provenance::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

const std::string* Provenance::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string Provenance::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  LabeledDataset out;
  out.name = ds.name;
  out.provenance = ds.provenance;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), ds.dim());
  out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels[r] = ds.labels[indices[r]];
  }
  return out;
}

std::size_t count_classes(const LabeledDataset& ds) {
  return std::set<int>(ds.labels.begin(), ds.labels.end()).size();
}

EigenProfile EigenProfile::constant(int d) { return {ProfileKind::constant, 0.0, d, {}}; }

EigenProfile EigenProfile::power_decay(int d, double p) {
  return {ProfileKind::power_decay, p, d, {}};
}

EigenProfile EigenProfile::exponential_decay(int d, double rate) {
  return {ProfileKind::exponential_decay, rate, d, {}};
}

EigenProfile EigenProfile::parse(const std::string& spec, int d) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](double fallback) {
    if (arg.empty()) return fallback;
    double v = 0.0;
    if (!parse_double(arg, v)) throw std::invalid_argument("bad profile parameter in '" + spec + "'");
    return v;
  };
  if (kind == "constant") return constant(d);
  if (kind == "power_decay") return power_decay(d, number(1.0));
  if (kind == "exponential_decay") return exponential_decay(d, number(0.2));
  if (kind == "explicit") {
    EigenProfile p{ProfileKind::explicit_values, 0.0, 0, {}};
    std::string_view rest = arg;
    while (!rest.empty()) {
      const auto slash = rest.find('/');
      double v = 0.0;
      if (!parse_double(rest.substr(0, slash), v))
        throw std::invalid_argument("bad explicit singular value in '" + spec + "'");
      p.values.push_back(v);
      if (slash == std::string_view::npos) break;
      rest.remove_prefix(slash + 1);
    }
    p.d = static_cast<int>(p.values.size());
    return p;
  }
  throw std::invalid_argument("unknown eigenvalue profile '" + spec + "'");
}

std::vector<double> singular_values(const EigenProfile& profile) {
  if (profile.d < 1) throw std::invalid_argument("profile dimension must be positive");
  std::vector<double> out(static_cast<std::size_t>(profile.d));
  switch (profile.kind) {
    case ProfileKind::constant:
      std::fill(out.begin(), out.end(), 1.0);
      break;
    case ProfileKind::power_decay:
      if (!(profile.parameter >= 0.0)) throw std::invalid_argument("power_decay exponent must be >= 0");
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::pow(static_cast<double>(i + 1), -profile.parameter);
      break;
    case ProfileKind::exponential_decay:
      if (!(profile.parameter >= 0.0)) throw std::invalid_argument("exponential_decay rate must be >= 0");
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::exp(-profile.parameter * static_cast<double>(i));
      break;
    case ProfileKind::explicit_values:
      if (profile.values.size() != out.size())
        throw std::invalid_argument("explicit profile length does not match d");
      out = profile.values;
      if (out.front() != 1.0) throw std::invalid_argument("explicit profile must start at 1");
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0)) throw std::invalid_argument("explicit profile values must be positive");
        if (i > 0 && out[i] > out[i - 1])
          throw std::invalid_argument("explicit profile must be non-increasing");
      }
      break;
  }
  for (double& v : out)
    if (!(v > 0.0)) v = std::numeric_limits<double>::min();  // underflow of very fast decay
  return out;
}

std::string profile_label(const EigenProfile& profile) {
  switch (profile.kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::power_decay: return "power_decay_" + format_number(profile.parameter);
    case ProfileKind::exponential_decay: return "exponential_decay_" + format_number(profile.parameter);
    case ProfileKind::explicit_values: return "explicit";
  }
  return "unknown";
}

std::span<const double, kLabelWeightCount> label_weight_sequence() { return kLabelWeights; }

LabeledDataset gen_ellipsoid_dataset(const EigenProfile& profile, int n, std::uint64_t sample_seed) {
  if (profile.d > static_cast<int>(kLabelWeightCount))
    throw std::invalid_argument("label vector sequence exhausted");
  if (n < 2) throw std::invalid_argument("gen_ellipsoid_dataset: need at least 2 points");
  const std::vector<double> sigma = singular_values(profile);
  const int d = profile.d;
  const Eigen::Map<const Eigen::VectorXd> w(kLabelWeights.data(), d);
  const Eigen::Map<const Eigen::VectorXd> a(sigma.data(), d);

  LabeledDataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(static_cast<std::size_t>(n));
  Rng rng(sample_seed);
  Eigen::VectorXd u(d);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    do {
      for (int j = 0; j < d; ++j) u(j) = rng.normal();
      norm = u.norm();
    } while (norm == 0.0);
    const Eigen::VectorXd x = a.cwiseProduct(u / norm);
    ds.features.row(i) = x.transpose();
    ds.labels[static_cast<std::size_t>(i)] = w.dot(x) > 0.0 ? 1 : 0;
  }
  ds.name = "ellipsoid_" + profile_label(profile) + "_d" + std::to_string(d);
  ds.provenance.set("source", "synthetic_ellipsoid");
  ds.provenance.set("sampling", "sphere_pushforward");
  ds.provenance.set("profile", profile_label(profile));
  ds.provenance.set("d", std::to_string(d));
  ds.provenance.set("n", std::to_string(n));
  ds.provenance.set("sample_seed", std::to_string(sample_seed));
  ds.provenance.set("label_weight_master_seed", std::to_string(kLabelWeightMasterSeed));
  return ds;
}

LabeledDataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto cell : split_cells(line)) header.emplace_back(cell);
  }
  if (header.empty()) throw DataError(path + ": empty file");
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw DataError(path + ": missing label column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t width = header.size();

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() != width) {
      throw DataError(path + ": row " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) {
        int label = 0;
        const auto cell = cells[c];
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || label < 0) {
          throw DataError(path + ": row " + std::to_string(line_no) + ": label '" +
                          std::string(cell) + "' is not a non-negative integer");
        }
        labels.push_back(label);
      } else {
        double v = 0.0;
        if (!parse_double(cells[c], v)) {
          throw DataError(path + ": row " + std::to_string(line_no) + ": non-numeric cell '" +
                          std::string(cells[c]) + "' in column '" + header[c] + "'");
        }
        values.push_back(v);
      }
    }
  }
  if (labels.empty()) throw DataError(path + ": no data rows");

  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(width - 1);
  LabeledDataset ds;
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  ds.labels = std::move(labels);
  auto stem = path.substr(path.find_last_of('/') + 1);
  ds.name = stem.substr(0, stem.find_last_of('.'));
  ds.provenance.set("source", path);
  ds.provenance.set("n", std::to_string(n));
  ds.provenance.set("d", std::to_string(d));
  return ds;
}

LabeledDataset normalize_features(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    auto col = out.features.col(j);
    const double lo = col.minCoeff();
    const double range = col.maxCoeff() - lo;
    if (range > 0.0) {
      col = (col.array() - lo) / range;
    } else {
      col.setZero();
    }
  }
  out.provenance.set("normalized", "minmax_0_1");
  return out;
}

LabeledDataset embed_and_noise(const LabeledDataset& ds, int ambient_dim, double gamma,
                               std::uint64_t noise_seed) {
  if (ambient_dim < ds.dim())
    throw std::invalid_argument("embed_and_noise: ambient_dim is smaller than the feature dimension");
  if (!(gamma >= 0.0)) throw std::invalid_argument("embed_and_noise: gamma must be non-negative");
  LabeledDataset out;
  out.name = ds.name;
  out.labels = ds.labels;
  out.provenance = ds.provenance;
  out.features = Eigen::MatrixXd::Zero(ds.size(), ambient_dim);
  out.features.leftCols(ds.dim()) = ds.features;
  if (gamma > 0.0) {
    const double sd = std::sqrt(gamma);
    Rng rng(noise_seed);
    for (Eigen::Index i = 0; i < out.features.rows(); ++i)
      for (Eigen::Index j = 0; j < ambient_dim; ++j) out.features(i, j) += sd * rng.normal();
  }
  out.provenance.set("ambient_dim", std::to_string(ambient_dim));
  out.provenance.set("gamma", format_number(gamma));
  out.provenance.set("noise_seed", std::to_string(noise_seed));
  return out;
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t split_seed) {
  if (n < 5) throw std::invalid_argument("train_test_split: need at least 5 instances");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) throw std::invalid_argument("train_test_split: empty side");
  Rng rng(split_seed);
  auto order = permutation(n, rng);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t split_seed) {
  const auto idx = split_indices(static_cast<std::size_t>(ds.size()), train_fraction, split_seed);
  auto train = subset(ds, idx.train);
  auto test = subset(ds, idx.test);
  train.provenance.set("split_seed", std::to_string(split_seed));
  test.provenance.set("split_seed", std::to_string(split_seed));
  return {std::move(train), std::move(test)};
}

}  // namespace cml
