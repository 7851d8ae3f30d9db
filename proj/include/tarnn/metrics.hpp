#pragma once

#include <span>

#include "tarnn/matrix.hpp"

namespace tarnn {

struct Metrics {
  double rmse = 0.0;
  double nrmse = 0.0;          // rmse / std(truth)
  double mape = 0.0;           // mean(|p-t|/|t|) * 100, zero truths excluded
  std::size_t mape_excluded = 0;
};

// Elementwise comparison of two equally-shaped matrices.
Metrics evaluate_metrics(const DenseMatrix& pred, const DenseMatrix& truth);

double accuracy(std::span<const int> pred, std::span<const int> truth);

struct Aggregate {
  double mean = 0.0, stddev = 0.0, median = 0.0, min = 0.0, max = 0.0;
};

Aggregate aggregate(std::span<const double> xs);

}  // namespace tarnn
