#include "tarnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tarnn {

Metrics evaluate_metrics(const DenseMatrix& pred, const DenseMatrix& truth) {
  if (!pred.same_shape(truth))
    throw std::invalid_argument("evaluate_metrics: shape mismatch");
  if (pred.empty())
    throw std::invalid_argument("evaluate_metrics: empty input");

  const std::size_t n = pred.size();
  double se = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pred.data()[i] - truth.data()[i];
    se += e * e;
    mean += truth.data()[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = truth.data()[i] - mean;
    var += c * c;
  }
  var /= static_cast<double>(n);

  Metrics m;
  m.rmse = std::sqrt(se / static_cast<double>(n));
  m.nrmse = var > 0.0 ? m.rmse / std::sqrt(var)
                      : (m.rmse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

  double ape = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = truth.data()[i];
    if (t == 0.0) {
      ++m.mape_excluded;
      continue;
    }
    ape += std::fabs(pred.data()[i] - t) / std::fabs(t);
    ++counted;
  }
  m.mape = counted > 0 ? 100.0 * ape / static_cast<double>(counted) : 0.0;
  return m;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

Aggregate aggregate(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("aggregate: empty input");
  Aggregate a;
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  a.min = v.front();
  a.max = v.back();
  const std::size_t n = v.size();
  a.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  for (double x : v) a.mean += x;
  a.mean /= static_cast<double>(n);
  for (double x : v) {
    const double c = x - a.mean;
    a.stddev += c * c;
  }
  a.stddev = std::sqrt(a.stddev / static_cast<double>(n));
  return a;
}

}  // namespace tarnn
