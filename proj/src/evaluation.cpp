#include "cml/evaluation.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace cml {
namespace {

// Points as columns, mapped through the metric when present.
Eigen::MatrixXd mapped_columns(const Eigen::MatrixXd& rows, const Metric* m) {
  if (m == nullptr) return rows.transpose();
  if (m->dim() != rows.cols()) throw std::invalid_argument("metric and data dimensions differ");
  return m->matrix * rows.transpose();
}

// Index of the nearest column, skipping `exclude`; strict < keeps the lowest index on ties.
Eigen::Index nearest(const Eigen::MatrixXd& train_cols, const Eigen::VectorXd& q, Eigen::Index exclude = -1) {
  Eigen::Index best = -1;
  double best_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < train_cols.cols(); ++j) {
    if (j == exclude) continue;
    const double sq = (train_cols.col(j) - q).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return best;
}

void check_train(const LabeledDataset& train) {
  if (train.size() == 0) throw std::invalid_argument("knn_predict: empty training set");
}

EvalResult evaluate_impl(const LabeledDataset& train, const LabeledDataset& test, const Metric* m) {
  check_train(train);
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (train.dim() != test.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  const auto predicted = knn_predict_all(train, test.features, m);
  EvalResult out;
  out.num_total = static_cast<int>(test.size());
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == test.labels[i]) ++out.num_correct;
  out.error_rate = 1.0 - static_cast<double>(out.num_correct) / out.num_total;
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

std::vector<int> knn_predict_all(const LabeledDataset& train, const Eigen::MatrixXd& queries,
                                 const Metric* m) {
  check_train(train);
  if (queries.cols() != train.dim()) throw std::invalid_argument("knn_predict: dimension mismatch");
  const Eigen::MatrixXd train_cols = mapped_columns(train.features, m);
  const Eigen::MatrixXd query_cols = mapped_columns(queries, m);
  std::vector<int> out(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < query_cols.cols(); ++i) {
    const Eigen::VectorXd q = query_cols.col(i);
    out[static_cast<std::size_t>(i)] = train.labels[static_cast<std::size_t>(nearest(train_cols, q))];
  }
  return out;
}

int knn_predict(const LabeledDataset& train, const Eigen::VectorXd& query) {
  return knn_predict_all(train, query.transpose(), nullptr).front();
}

int knn_predict(const LabeledDataset& train, const Eigen::VectorXd& query, const Metric& m) {
  return knn_predict_all(train, query.transpose(), &m).front();
}

EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test) {
  return evaluate_impl(train, test, nullptr);
}

EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test, const Metric& m) {
  return evaluate_impl(train, test, &m);
}

double leave_one_out_error(const LabeledDataset& train, const Metric* m) {
  if (train.size() < 2) throw std::invalid_argument("leave_one_out_error: need at least 2 points");
  const Eigen::MatrixXd cols = mapped_columns(train.features, m);
  int wrong = 0;
  for (Eigen::Index i = 0; i < cols.cols(); ++i) {
    const Eigen::VectorXd q = cols.col(i);
    const auto j = nearest(cols, q, i);
    if (train.labels[static_cast<std::size_t>(j)] != train.labels[static_cast<std::size_t>(i)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(cols.cols());
}

}  // namespace cml
