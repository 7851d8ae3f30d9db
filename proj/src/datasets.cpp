#include "tarnn/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tarnn {
namespace {

std::vector<double> split_numeric_line(const std::string& line,
                                       const std::string& where) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc{})
      throw std::runtime_error(where + ": non-numeric field");
    out.push_back(v);
    p = res.ptr;
  }
  return out;
}

double gaussian(RngStream& rng) {
  // Box-Muller; 1-u keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.next_unit();
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

LabeledSet load_label_first_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open archive: " + path);

  LabeledSet set;
  std::string line;
  std::size_t lineno = 0;
  int max_label = -1;
  std::size_t first_len = 0;
  bool length_warned = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::vector<double> cells = split_numeric_line(line, where);
    if (cells.size() < 2)
      throw std::runtime_error(where + ": sample needs a label and values");
    const double raw_label = cells[0];
    const int lbl = static_cast<int>(std::lround(raw_label));
    if (std::fabs(raw_label - lbl) > 1e-9)
      throw std::runtime_error(where + ": non-integer class label");

    SampledSeries s;
    const std::size_t len = cells.size() - 1;
    s.timestamps.resize(len);
    s.values = DenseMatrix(len, 1);
    for (std::size_t i = 0; i < len; ++i) {
      s.timestamps[i] = static_cast<double>(i);
      s.values(i, 0) = cells[i + 1];
    }
    s.label = lbl;
    max_label = std::max(max_label, lbl);
    if (first_len == 0)
      first_len = len;
    else if (len != first_len && !length_warned) {
      set.warnings.push_back(path + ": mixed sample lengths (" +
                             std::to_string(first_len) + " vs " +
                             std::to_string(len) + ")");
      length_warned = true;
    }
    set.items.push_back(std::move(s));
  }
  if (set.items.empty()) throw std::runtime_error("empty archive: " + path);

  // Labels 1..K are the archive convention; shift to 0..K-1.
  int min_label = max_label;
  for (const auto& s : set.items) min_label = std::min(min_label, *s.label);
  if (min_label != 0)
    for (auto& s : set.items) s.label = *s.label - min_label;
  set.n_classes = max_label - min_label + 1;
  return set;
}

UWaveData load_uwave(const std::string& train_path, const std::string& test_path) {
  UWaveData d;
  d.train = load_label_first_archive(train_path);
  d.test = load_label_first_archive(test_path);
  auto check = [](LabeledSet& s, std::size_t expect_count, const char* which) {
    if (s.items.size() != expect_count)
      s.warnings.push_back(std::string(which) + " sample count " +
                           std::to_string(s.items.size()) + " (published: " +
                           std::to_string(expect_count) + ")");
    if (s.n_classes != 8)
      s.warnings.push_back(std::string(which) + " has " +
                           std::to_string(s.n_classes) + " classes (expected 8)");
  };
  check(d.train, 890, "train");
  check(d.test, 3580, "test");
  return d;
}

void write_label_first_archive(const LabeledSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write archive: " + path);
  char buf[32];
  for (const auto& s : set.items) {
    out << (*s.label + 1);  // archive labels are 1-based
    for (std::size_t i = 0; i < s.length(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", s.values(i, 0));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

SampledSeries subsample_random_fraction(const SampledSeries& s, double fraction,
                                        RngStream& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("subsample: fraction must lie in (0, 1]");
  const std::size_t len = s.length();
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(len)));
  std::vector<std::size_t> idx(len);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.next_below(len - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  SampledSeries out;
  out.label = s.label;
  out.timestamps.resize(keep);
  out.values = DenseMatrix(keep, s.dims());
  for (std::size_t i = 0; i < keep; ++i) {
    out.timestamps[i] = s.timestamps[idx[i]];
    for (std::size_t j = 0; j < s.dims(); ++j)
      out.values(i, j) = s.values(idx[i], j);
  }
  if (s.targets) {
    DenseMatrix t(keep, s.targets->cols());
    for (std::size_t i = 0; i < keep; ++i)
      for (std::size_t j = 0; j < t.cols(); ++j)
        t(i, j) = (*s.targets)(idx[i], j);
    out.targets = std::move(t);
  }
  return out;
}

SampledSeries load_timestamped_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (lineno == 1 && line.find_first_not_of("0123456789+-.eE, \t\r") !=
                           std::string::npos)
      continue;  // header
    const std::string where = path + ":" + std::to_string(lineno);
    const std::vector<double> cells = split_numeric_line(line, where);
    if (cells.size() != 2)
      throw std::runtime_error(where + ": expected two columns (t,value)");
    rows.emplace_back(cells[0], cells[1]);
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].first == rows[i + 1].first)
      throw std::runtime_error(path + ": duplicate timestamp " +
                               std::to_string(rows[i].first));

  SampledSeries s;
  s.timestamps.resize(rows.size());
  s.values = DenseMatrix(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.timestamps[i] = rows[i].first;
    s.values(i, 0) = rows[i].second;
  }
  s.validate();
  return s;
}

namespace {

double lerp_series(const SampledSeries& s, std::size_t dim, double t) {
  const auto& ts = s.timestamps;
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  if (i + 1 >= ts.size()) i = ts.size() - 2;
  const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return s.values(i, dim) + w * (s.values(i + 1, dim) - s.values(i, dim));
}

}  // namespace

SampledSeries linear_interpolate_at(const SampledSeries& s,
                                    std::span<const double> times) {
  if (s.length() < 2)
    throw std::invalid_argument("interpolate: need >= 2 samples");
  for (double t : times)
    if (t < s.timestamps.front() || t > s.timestamps.back())
      throw std::invalid_argument("interpolate: time outside the sampled span");
  SampledSeries out;
  out.timestamps.assign(times.begin(), times.end());
  out.values = DenseMatrix(times.size(), s.dims());
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t j = 0; j < s.dims(); ++j)
      out.values(i, j) = lerp_series(s, j, times[i]);
  return out;
}

SampledSeries regularize_by_interpolation(const SampledSeries& s,
                                          double target_dt) {
  if (!(target_dt > 0.0))
    throw std::invalid_argument("regularize: target_dt must be > 0");
  std::vector<double> grid;
  const double t0 = s.timestamps.front();
  const double t1 = s.timestamps.back();
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * target_dt;
    if (t > t1 + 1e-9 * target_dt) break;
    grid.push_back(std::min(t, t1));
  }
  return linear_interpolate_at(s, grid);
}

std::vector<TemporalFold> temporal_cv_folds(std::size_t region_len,
                                            std::size_t fold_len) {
  if (fold_len == 0) throw std::invalid_argument("cv folds: zero fold length");
  if (region_len < 2 * fold_len)
    throw std::invalid_argument("cv folds: region shorter than two folds");
  std::vector<TemporalFold> folds;
  for (std::size_t at = 0; at + fold_len <= region_len; at += fold_len)
    folds.push_back({at, at + fold_len});
  return folds;
}

HoldoutSplit split_holdout(std::size_t n, double val_fraction,
                           std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[rng.next_below(i)]);
  const auto n_val = static_cast<std::size_t>(
      std::round(val_fraction * static_cast<double>(n)));
  HoldoutSplit sp;
  sp.val_fraction = val_fraction;
  sp.seed = seed;
  sp.val.assign(idx.begin(), idx.begin() + n_val);
  sp.train.assign(idx.begin() + n_val, idx.end());
  std::sort(sp.val.begin(), sp.val.end());
  std::sort(sp.train.begin(), sp.train.end());
  return sp;
}

LabeledSet make_gesture_standin(std::size_t n_samples, std::size_t length,
                                std::uint64_t seed) {
  // Eight waveform families: class-specific frequency/phase/envelope of a
  // two-harmonic curve, plus per-sample warp, jitter and noise. Difficulty
  // is tuned so a well-posed classifier on the 10% subsample lands in the
  // high-0.8/low-0.9 accuracy range.
  LabeledSet set;
  set.n_classes = 8;
  RngStream root(seed);
  set.items.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    RngStream rng = root.split(i);
    const int cls = static_cast<int>(rng.next_below(8));
    const double f1 = 1.0 + 0.5 * static_cast<double>(cls);
    const double f2 = 2.0 + 0.25 * static_cast<double>(7 - cls);
    const double base_phase = 0.7 * static_cast<double>(cls);
    const double amp2 = 0.35 + 0.05 * static_cast<double>(cls % 4);

    const double phase = base_phase + rng.uniform(-0.35, 0.35);
    const double warp_amp = rng.uniform(0.0, 0.06);
    const double warp_phase = rng.uniform(0.0, 6.283185307179586);
    const double amp = rng.uniform(0.85, 1.15);

    SampledSeries s;
    s.label = cls;
    s.timestamps.resize(length);
    s.values = DenseMatrix(length, 1);
    const double two_pi = 6.283185307179586;
    for (std::size_t k = 0; k < length; ++k) {
      const double t0 = static_cast<double>(k) / static_cast<double>(length - 1);
      const double t = t0 + warp_amp * std::sin(two_pi * t0 + warp_phase);
      double v = amp * std::sin(two_pi * f1 * t + phase) +
                 amp2 * std::sin(two_pi * f2 * t + 2.1 * phase);
      v += 0.5 * gaussian(rng);
      s.timestamps[k] = static_cast<double>(k);
      s.values(k, 0) = v;
    }
    // z-normalize per sample, the archive convention
    double mean = 0.0;
    for (std::size_t k = 0; k < length; ++k) mean += s.values(k, 0);
    mean /= static_cast<double>(length);
    double var = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
      const double c = s.values(k, 0) - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / static_cast<double>(length));
    for (std::size_t k = 0; k < length; ++k)
      s.values(k, 0) = (s.values(k, 0) - mean) / sd;
    set.items.push_back(std::move(s));
  }
  return set;
}

SampledSeries make_cave_standin(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  SampledSeries s;
  s.timestamps.resize(n);
  s.values = DenseMatrix(n, 1);
  double t = 0.0;
  double ar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t += std::exp(0.45 * gaussian(rng));  // lognormal gaps, mean ~1.1
    ar = 0.8 * ar + 0.05 * gaussian(rng);
    const double v = -8.5 + 0.45 * std::sin(t / 28.6) +
                     0.30 * std::sin(t / 5.57 + 1.0) +
                     0.20 * std::sin(t / 1.32 + 2.0) + 0.002 * t + ar;
    s.timestamps[i] = t;
    s.values(i, 0) = v;
  }
  return s;
}

}  // namespace tarnn
