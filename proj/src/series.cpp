#include "tarnn/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tarnn/timegrid.hpp"
#include "json.hpp"

namespace tarnn {

void SampledSeries::validate() const {
  if (timestamps.size() != values.rows())
    throw std::invalid_argument("series: timestamp/value row count mismatch");
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i)
    if (!(timestamps[i] < timestamps[i + 1]))
      throw std::invalid_argument("series: timestamps not strictly increasing");
  if (!all_finite(values))
    throw std::invalid_argument("series: non-finite values");
  if (targets && targets->rows() != values.rows())
    throw std::invalid_argument("series: target row count mismatch");
}

std::vector<double> SampledSeries::deltas() const {
  return deltas_from_timestamps(timestamps);
}

SampledSeries shift_for_prediction(const SampledSeries& raw) {
  const std::size_t n = raw.length();
  if (n < 2)
    throw std::invalid_argument("shift_for_prediction: need >= 2 samples");
  SampledSeries out;
  out.timestamps.assign(raw.timestamps.begin() + 1, raw.timestamps.end());
  out.values = DenseMatrix(n - 1, raw.dims());
  DenseMatrix tgt(n - 1, raw.dims());
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j < raw.dims(); ++j) {
      out.values(i, j) = raw.values(i, j);
      tgt(i, j) = raw.values(i + 1, j);
    }
  out.targets = std::move(tgt);
  return out;
}

SampledSeries slice_rows(const SampledSeries& s, std::size_t begin,
                         std::size_t end) {
  if (begin >= end || end > s.length())
    throw std::invalid_argument("slice_rows: bad range");
  SampledSeries out;
  out.label = s.label;
  out.timestamps.assign(s.timestamps.begin() + begin, s.timestamps.begin() + end);
  out.values = DenseMatrix(end - begin, s.dims());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t j = 0; j < s.dims(); ++j)
      out.values(i - begin, j) = s.values(i, j);
  if (s.targets) {
    DenseMatrix t(end - begin, s.targets->cols());
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < t.cols(); ++j)
        t(i - begin, j) = (*s.targets)(i, j);
    out.targets = std::move(t);
  }
  return out;
}

Normalizer fit_normalizer(const SampledSeries& s, std::size_t first,
                          std::size_t last) {
  if (last <= first || last > s.length())
    throw std::invalid_argument("fit_normalizer: bad sample range");
  const std::size_t d = s.dims();
  Normalizer nm{Vector(d, 0.0), Vector(d, 0.0)};
  const double count = static_cast<double>(last - first);
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t j = 0; j < d; ++j) nm.mean[j] += s.values(i, j);
  for (double& m : nm.mean) m /= count;
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = s.values(i, j) - nm.mean[j];
      nm.stddev[j] += c * c;
    }
  for (double& v : nm.stddev) v = std::sqrt(v / count);
  for (double& v : nm.stddev)
    if (v == 0.0) v = 1.0;
  return nm;
}

SampledSeries apply_normalizer(const Normalizer& n, const SampledSeries& s) {
  SampledSeries out = s;
  for (std::size_t i = 0; i < out.values.rows(); ++i)
    for (std::size_t j = 0; j < out.values.cols(); ++j)
      out.values(i, j) = (out.values(i, j) - n.mean[j]) / n.stddev[j];
  if (out.targets)
    for (std::size_t i = 0; i < out.targets->rows(); ++i)
      for (std::size_t j = 0; j < out.targets->cols(); ++j)
        (*out.targets)(i, j) = ((*out.targets)(i, j) - n.mean[j]) / n.stddev[j];
  return out;
}

void denormalize_values(const Normalizer& n, DenseMatrix& values) {
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = 0; j < values.cols(); ++j)
      values(i, j) = values(i, j) * n.stddev[j] + n.mean[j];
}

void write_series_csv(const SampledSeries& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t";
  for (std::size_t j = 0; j < s.dims(); ++j) out << ",x" << j;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < s.length(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", s.timestamps[i]);
    out << buf;
    for (std::size_t j = 0; j < s.dims(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.values(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (s.label) {
    nlohmann::json meta;
    meta["label"] = *s.label;
    std::ofstream side(path + ".meta.json");
    side << meta.dump(2) << "\n";
  }
}

SampledSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty series file: " + path);
  std::size_t dims = 0;
  for (char c : line)
    if (c == ',') ++dims;
  if (dims == 0) throw std::runtime_error("malformed series header: " + path);

  std::vector<double> ts;
  std::vector<double> flat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{})
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": non-numeric cell '" + cell + "'");
      if (col == 0)
        ts.push_back(v);
      else
        flat.push_back(v);
      ++col;
    }
    if (col != dims + 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(dims + 1) +
                               " cells");
  }
  SampledSeries s;
  s.timestamps = std::move(ts);
  s.values = DenseMatrix(s.timestamps.size(), dims);
  for (std::size_t i = 0; i < s.values.rows(); ++i)
    for (std::size_t j = 0; j < dims; ++j)
      s.values(i, j) = flat[i * dims + j];

  std::ifstream side(path + ".meta.json");
  if (side) {
    nlohmann::json meta = nlohmann::json::parse(side);
    if (meta.contains("label")) s.label = meta["label"].get<int>();
  }
  s.validate();
  return s;
}

}  // namespace tarnn
