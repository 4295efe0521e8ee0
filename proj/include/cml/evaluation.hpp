#pragma once

#include <vector>

#include <Eigen/Core>

#include "cml/data.hpp"
#include "cml/metric.hpp"

namespace cml {

struct EvalResult {
  double error_rate = 0.0;
  int num_correct = 0;
  int num_total = 0;
  double wall_time_ms = 0.0;
};

/// 1-NN label of `query` under Euclidean distance. Ties go to the smallest
/// training index.
int knn_predict(const LabeledDataset& train, const Eigen::VectorXd& query);

/// 1-NN label after mapping both sides through the metric (x -> Mx).
int knn_predict(const LabeledDataset& train, const Eigen::VectorXd& query, const Metric& m);

/// Predictions for every row of `queries` (Euclidean when `m` is null).
std::vector<int> knn_predict_all(const LabeledDataset& train, const Eigen::MatrixXd& queries,
                                 const Metric* m = nullptr);

EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test);
EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test, const Metric& m);

/// Leave-one-out 1-NN error on `train` (each point excluded from its own
/// neighbour search). Euclidean when `m` is null.
double leave_one_out_error(const LabeledDataset& train, const Metric* m = nullptr);

}  // namespace cml
