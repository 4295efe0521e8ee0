#include "cml/evaluation.hpp"
#include "cml/random.hpp"
#include "doctest.h"

using namespace cml;

namespace {

LabeledDataset line(std::initializer_list<double> xs, std::initializer_list<int> labels) {
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) ds.features(i++, 0) = x;
  ds.labels = labels;
  return ds;
}

}  // namespace

TEST_CASE("exact match returns that point's label") {
  const auto train = line({0, 1, 2, 3}, {0, 1, 0, 1});
  CHECK(knn_predict(train, Eigen::VectorXd::Constant(1, 1.0)) == 1);
  CHECK(knn_predict(train, Eigen::VectorXd::Constant(1, 2.0)) == 0);
}

TEST_CASE("ties go to the lower index") {
  const auto train = line({-1, 1}, {7, 3});
  CHECK(knn_predict(train, Eigen::VectorXd::Zero(1)) == 7);
  const auto swapped = line({1, -1}, {3, 7});
  CHECK(knn_predict(swapped, Eigen::VectorXd::Zero(1)) == 3);
}

TEST_CASE("scaled identity metric gives Euclidean predictions") {
  Rng rng(1);
  LabeledDataset train;
  train.features = normal_matrix(200, 6, rng);
  train.labels.resize(200);
  for (auto& l : train.labels) l = static_cast<int>(rng.below(3));
  const Eigen::MatrixXd queries = normal_matrix(50, 6, rng);
  const Metric m{Eigen::MatrixXd::Identity(6, 6) / 4.2, 4.2};
  const auto metric_preds = knn_predict_all(train, queries, &m);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    // Brute-force Euclidean scan.
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < train.size(); ++i)
      if ((train.features.row(i) - queries.row(q)).squaredNorm() <
          (train.features.row(best) - queries.row(q)).squaredNorm())
        best = i;
    CHECK(metric_preds[static_cast<std::size_t>(q)] == train.labels[static_cast<std::size_t>(best)]);
    CHECK(knn_predict(train, Eigen::VectorXd(queries.row(q).transpose()), m) ==
          train.labels[static_cast<std::size_t>(best)]);
  }
}

TEST_CASE("evaluate") {
  const auto train = line({0, 1, 5, 6}, {0, 0, 1, 1});
  const auto self = evaluate(train, train);
  CHECK(self.error_rate == 0.0);
  CHECK(self.num_correct == 4);
  CHECK(self.num_total == 4);

  const auto flipped = line({0, 1, 5, 6}, {1, 1, 0, 0});
  CHECK(evaluate(train, flipped).error_rate == 1.0);

  // Queries near each training point; the last one carries the wrong label.
  const auto test = line({0.2, 1.2, 5.2, 5.8}, {0, 0, 1, 0});
  CHECK(evaluate(train, test).error_rate == 0.25);
  CHECK(evaluate(train, test, Metric{Eigen::MatrixXd::Identity(1, 1), 1.0}).error_rate == 0.25);
}

TEST_CASE("leave-one-out excludes the point itself") {
  const auto ds = line({0, 0.1, 5, 5.1, 2.6}, {0, 0, 1, 1, 0});
  // 2.6 is nearest to 5 (2.4 vs 2.5): one mistake.
  CHECK(leave_one_out_error(ds) == doctest::Approx(0.2));
  const Metric m{Eigen::MatrixXd::Identity(1, 1) * 0.1, 10.0};
  CHECK(leave_one_out_error(ds, &m) == doctest::Approx(0.2));
}

TEST_CASE("dimension mismatches are rejected") {
  const auto train = line({0, 1}, {0, 1});
  CHECK_THROWS(knn_predict(train, Eigen::VectorXd::Zero(2)));
  CHECK_THROWS(knn_predict_all(train, Eigen::MatrixXd::Zero(3, 2)));
  CHECK_THROWS(evaluate(LabeledDataset{}, train));
}
