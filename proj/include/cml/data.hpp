#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cml {

/// Ordered key=value record describing how a dataset was produced.
class Provenance {
 public:
  void set(const std::string& key, const std::string& value);
  const std::string* find(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  /// One `key=value` line per entry, in insertion order.
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d, one instance per row
  std::vector<int> labels;   // length n, small non-negative integers
  std::string name;
  Provenance provenance;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// Rows `indices` of `ds`, in the given order. Name and provenance are kept.
LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices);

/// Number of distinct labels.
std::size_t count_classes(const LabeledDataset& ds);

enum class ProfileKind { constant, power_decay, exponential_decay, explicit_values };

/// Diagonal of the ellipsoid matrix A.
///
///   constant             sigma_i = 1
///   power_decay(p)       sigma_i = i^-p
///   exponential_decay(r) sigma_i = exp(-r (i - 1))
///   explicit_values      sigma_i = values[i - 1], must already be positive,
///                        non-increasing and start at 1
struct EigenProfile {
  ProfileKind kind = ProfileKind::constant;
  double parameter = 0.0;
  int d = 1;
  std::vector<double> values;

  static EigenProfile constant(int d);
  static EigenProfile power_decay(int d, double p);
  static EigenProfile exponential_decay(int d, double rate);

  /// Parses `constant`, `power_decay:<p>`, `exponential_decay:<r>` or
  /// `explicit:<v1>/<v2>/...` (explicit fixes d to the number of values).
  static EigenProfile parse(const std::string& spec, int d);
};

/// Singular values of A for the profile; throws std::invalid_argument when the
/// invariants (positive, non-increasing, max 1) cannot hold.
std::vector<double> singular_values(const EigenProfile& profile);

/// Short label such as "exponential_decay_0.2", used in dataset names.
std::string profile_label(const EigenProfile& profile);

inline constexpr std::size_t kLabelWeightCount = 1000;
inline constexpr std::uint64_t kLabelWeightMasterSeed = 20240611;

/// The fixed sequence of 1000 standard normals whose first d entries form the
/// labelling vector w of the synthetic ellipsoid data. Stored as a constant;
/// it was generated as Rng(kLabelWeightMasterSeed).normal() x 1000.
std::span<const double, kLabelWeightCount> label_weight_sequence();

/// n points x = A u with u uniform on S^{d-1} (normalized Gaussian), labelled
/// 1 when w'x > 0 and 0 otherwise. Throws std::invalid_argument("label vector
/// sequence exhausted") for d > 1000.
LabeledDataset gen_ellipsoid_dataset(const EigenProfile& profile, int n, std::uint64_t sample_seed);

/// Reads the dataset CSV schema: header row, an integer `label` column, every
/// other column numeric. Throws DataError with the offending line number.
LabeledDataset load_csv_dataset(const std::string& path);

/// Per-feature min-max scaling to [0, 1]; constant features become 0.
LabeledDataset normalize_features(const LabeledDataset& ds);

/// Pads features with zero coordinates up to ambient_dim, then adds i.i.d.
/// N(0, gamma) noise to every cell (row by row from Rng(noise_seed)).
LabeledDataset embed_and_noise(const LabeledDataset& ds, int ambient_dim, double gamma,
                               std::uint64_t noise_seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle; the first floor(train_fraction n) indices go to train.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t split_seed);

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t split_seed);

}  // namespace cml
