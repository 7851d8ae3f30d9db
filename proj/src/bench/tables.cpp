#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "bench_internal.hpp"
#include "json.hpp"
#include "tarnn/datasets.hpp"
#include "tarnn/kernels.hpp"

namespace tarnn::bench {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Gesture classification (table 1)
// ---------------------------------------------------------------------------

double esn_classifier_accuracy(const ReservoirModel& trained,
                               std::span<const SampledSeries> items,
                               std::size_t washout) {
  const DenseMatrix f = pooled_features_batch(trained, items, washout);
  const DenseMatrix scores = matmul(trained.w_out, f);
  std::size_t ok = 0;
  for (std::size_t s = 0; s < items.size(); ++s) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.rows(); ++c)
      if (scores(c, s) > scores(best, s)) best = c;
    if (static_cast<int>(best) == *items[s].label) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(items.size());
}

double feature_accuracy(const DenseMatrix& w_out, const DenseMatrix& feats,
                        std::span<const SampledSeries> items) {
  const DenseMatrix scores = matmul(w_out, feats);
  std::size_t ok = 0;
  for (std::size_t s = 0; s < items.size(); ++s) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.rows(); ++c)
      if (scores(c, s) > scores(best, s)) best = c;
    if (static_cast<int>(best) == *items[s].label) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(items.size());
}

}  // namespace

std::vector<TableRow> run_table1(const Table1Config& cfg, std::ostream* log) {
  constexpr int kClasses = 8;
  constexpr std::size_t kWashout = 5;

  // Data: the published archives when present, the synthetic stand-in
  // otherwise.
  LabeledSet train_full, test_full;
  if (!cfg.train_archive.empty()) {
    UWaveData d = load_uwave(cfg.train_archive, cfg.test_archive);
    if (log)
      for (const auto& s : {&d.train, &d.test})
        for (const auto& w : s->warnings) *log << "warning: " << w << "\n";
    train_full = std::move(d.train);
    test_full = std::move(d.test);
  } else {
    RngStream root(cfg.seed);
    train_full = make_gesture_standin(cfg.standin_train, cfg.standin_len,
                                      root.split(101).next_u64());
    test_full = make_gesture_standin(cfg.standin_test, cfg.standin_len,
                                     root.split(102).next_u64());
    if (log) *log << "using synthetic gesture stand-in\n";
  }

  // Random-10% subsample of every sequence, fixed across repetitions.
  RngStream root(cfg.seed);
  auto subsample_all = [&](LabeledSet& set, std::uint64_t salt) {
    for (std::size_t i = 0; i < set.items.size(); ++i) {
      RngStream r = root.split(salt).split(i);
      set.items[i] =
          subsample_random_fraction(set.items[i], cfg.subsample_fraction, r);
    }
  };
  subsample_all(train_full, 11);
  subsample_all(test_full, 12);

  const HoldoutSplit sp = split_holdout(train_full.items.size(),
                                        cfg.val_fraction,
                                        root.split(7).next_u64());
  std::vector<SampledSeries> tr, va;
  for (std::size_t i : sp.train) tr.push_back(train_full.items[i]);
  for (std::size_t i : sp.val) va.push_back(train_full.items[i]);
  const std::vector<SampledSeries>& te = test_full.items;

  std::vector<double> train_deltas;
  for (const auto& s : tr) {
    const auto d = s.deltas();
    train_deltas.insert(train_deltas.end(), d.begin(), d.end());
  }
  const TimeTransform lin = fit_transform(TimeScale::Linear, train_deltas);
  const TimeTransform ex = fit_transform(TimeScale::Exp, train_deltas, 1.0);

  std::vector<TableRow> rows;
  ReservoirFactory factory;

  auto esn_row = [&](ReservoirVariant variant, const TimeTransform& tf,
                     const std::string& name, const std::string& tf_name,
                     std::uint64_t salt) {
    ReservoirConfig rc;
    rc.variant = variant;
    rc.n_units = cfg.esn_units;
    rc.n_in = 1;
    rc.n_out = kClasses;
    rc.transform = tf;
    const std::uint64_t tune_seed = root.split(salt).next_u64();

    // One feature extraction per (alpha, radius, scaling) cell; the
    // regularization axis reuses it and is selected inside the cell.
    GridAxes outer = cfg.esn_grid;
    outer.lambda = {0.0};
    std::vector<double> cell_lambda(expand_grid(outer).size(), 0.0);
    DenseMatrix onehot(kClasses, tr.size());
    for (std::size_t s = 0; s < tr.size(); ++s)
      onehot(static_cast<std::size_t>(*tr[s].label), s) = 1.0;

    const GridOutcome tuned = grid_search(outer, [&](const GridCell& c) {
      ReservoirConfig cc = rc;
      cc.alpha = c.alpha;
      cc.radius = c.radius;
      cc.input_scaling = c.input_scaling;
      const ReservoirModel m = factory.make(cc, tune_seed);
      const DenseMatrix train_f = pooled_features_batch(m, tr, kWashout);
      const DenseMatrix val_f = pooled_features_batch(m, va, kWashout);
      double best_acc = -1.0, best_lambda = cfg.esn_grid.lambda.front();
      for (double lambda : cfg.esn_grid.lambda) {
        const DenseMatrix w = ridge_solve(train_f, onehot, lambda);
        const double acc = feature_accuracy(w, val_f, va);
        if (acc > best_acc) {
          best_acc = acc;
          best_lambda = lambda;
        }
      }
      cell_lambda[c.index] = best_lambda;
      return -best_acc;
    });
    const double lambda = cell_lambda[tuned.best.index];
    if (log)
      *log << name << ": tuned alpha=" << tuned.best.alpha
           << " radius=" << tuned.best.radius << " lambda=" << lambda
           << " scaling=" << tuned.best.input_scaling
           << " val_acc=" << -tuned.best_score << "\n";

    TableRow row;
    row.model = name;
    row.transform = tf_name;
    ReservoirConfig cc = rc;
    cc.alpha = tuned.best.alpha;
    cc.radius = tuned.best.radius;
    cc.input_scaling = tuned.best.input_scaling;
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.esn_seeds; ++rep) {
      const std::uint64_t seed = root.split(salt).split(1000 + rep).next_u64();
      const ReservoirModel m = factory.make(cc, seed);
      const ReservoirModel t =
          train_classifier(m, tr, kClasses, lambda, kWashout);
      row.per_seed.push_back(esn_classifier_accuracy(t, te, kWashout));
      if (rep == 0) row.params = t.w_out.size();
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.esn_seeds);
    row.accuracy = aggregate(row.per_seed);
    if (log)
      *log << name << " (" << tf_name << "): acc " << row.accuracy.mean
           << " +- " << row.accuracy.stddev << "\n";
    rows.push_back(std::move(row));
  };

  auto gated_row = [&](GatedVariant variant, const TimeTransform& tf,
                       const std::string& name, const std::string& tf_name,
                       std::uint64_t salt) {
    GatedConfig gc;
    gc.variant = variant;
    gc.n_hidden = cfg.gated_hidden;
    gc.n_in = 1;
    gc.n_out = kClasses;
    gc.transform = tf;

    TableRow row;
    row.model = name;
    row.transform = tf_name;
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.gated_seeds; ++rep) {
      RngStream mr(root.split(salt).split(2000 + rep).next_u64());
      GatedModel m = init_gated(gc, mr);
      if (rep == 0) row.params = m.param_count();
      TrainConfig tc;
      tc.loss = GatedLoss::CrossEntropy;
      tc.epochs = cfg.epochs;
      tc.batch_size = cfg.batch_size;
      tc.learning_rate = cfg.lr;
      tc.seed = root.split(salt).split(3000 + rep).next_u64();
      const TrainResult res = train(m, tr, va, tc);
      row.per_seed.push_back(classification_accuracy(res.model, te));
      if (log)
        *log << name << " rep " << rep << ": best_epoch=" << res.best_epoch
             << " test_acc=" << row.per_seed.back() << "\n";
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.gated_seeds);
    row.accuracy = aggregate(row.per_seed);
    if (log)
      *log << name << " (" << tf_name << "): acc " << row.accuracy.mean
           << " +- " << row.accuracy.stddev << "\n";
    rows.push_back(std::move(row));
  };

  if (cfg.run_esn) {
    esn_row(ReservoirVariant::ESNT, lin, "esnt", "linear", 21);
    esn_row(ReservoirVariant::TAESN, lin, "taesn", "linear", 22);
    esn_row(ReservoirVariant::TAESN, ex, "taesn", "exp", 23);
  }
  if (cfg.run_gated) {
    gated_row(GatedVariant::GRU, lin, "gru", "-", 31);
    gated_row(GatedVariant::GRUT, lin, "grut", "linear", 32);
    gated_row(GatedVariant::TAGRU, lin, "tagru", "linear", 33);
    gated_row(GatedVariant::TAGRU, ex, "tagru", "exp", 34);
  }
  return rows;
}

void write_table1_csv(const std::vector<TableRow>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "model,f_dt,params,accuracy_mean,accuracy_std,accuracy_median,"
         "accuracy_min,accuracy_max,train_seconds\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.4g\n",
                  r.model.c_str(), r.transform.c_str(), r.params,
                  r.accuracy.mean, r.accuracy.stddev, r.accuracy.median,
                  r.accuracy.min, r.accuracy.max, r.train_seconds);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Timestamped-series prediction (table 2)
// ---------------------------------------------------------------------------

namespace {

struct Table2Data {
  SampledSeries raw;        // original units
  PredictTask task;         // normalized + shifted
  std::size_t train_rows = 0, val_rows_end = 0, test_rows_end = 0;
};

// Shifted-row window [begin, end): denormalized predictions of a reservoir
// primed on everything before the window.
struct WindowScore {
  double rmse = 0.0, mape = 0.0;
};

DenseMatrix window_truth_raw(const Table2Data& d, std::size_t begin,
                             std::size_t end) {
  DenseMatrix t(end - begin, 1);
  for (std::size_t i = begin; i < end; ++i)
    t(i - begin, 0) =
        (*d.task.shifted.targets)(i, 0) * d.task.norm.stddev[0] +
        d.task.norm.mean[0];
  return t;
}

WindowScore score_window_raw(const Table2Data& d, DenseMatrix pred_norm,
                             std::size_t begin, std::size_t end) {
  denormalize_values(d.task.norm, pred_norm);
  const DenseMatrix truth = window_truth_raw(d, begin, end);
  const Metrics m = evaluate_metrics(pred_norm, truth);
  return {m.rmse, m.mape};
}

WindowScore eval_reservoir_window(const Table2Data& d, const ReservoirModel& m,
                                  std::size_t begin, std::size_t end) {
  const SampledSeries primer = slice_rows(d.task.shifted, 0, begin);
  std::vector<double> deltas(end - begin);
  for (std::size_t k = 0; k < deltas.size(); ++k)
    deltas[k] = d.task.shifted.timestamps[begin + k] -
                d.task.shifted.timestamps[begin + k - 1];
  const SampledSeries pred = run_generative(m, primer, deltas);
  return score_window_raw(d, pred.values, begin, end);
}

WindowScore eval_gated_window(const Table2Data& d, const GatedModel& m,
                              std::size_t begin, std::size_t end) {
  const SampledSeries primer = slice_rows(d.task.shifted, 0, begin);
  std::vector<double> deltas(end - begin);
  for (std::size_t k = 0; k < deltas.size(); ++k)
    deltas[k] = d.task.shifted.timestamps[begin + k] -
                d.task.shifted.timestamps[begin + k - 1];
  const SampledSeries pred = run_generative(m, primer, deltas);
  return score_window_raw(d, pred.values, begin, end);
}

// Mean fold RMSE (raw units) of forward-chaining CV for one reservoir
// configuration; folds without enough prior data are skipped.
double cv_mean_rmse(const Table2Data& d, ReservoirFactory& factory,
                    const ReservoirConfig& rc, double lambda,
                    std::uint64_t seed, std::size_t fold_len,
                    std::size_t min_train, std::size_t washout) {
  const auto folds = temporal_cv_folds(d.train_rows + 1, fold_len);
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& f : folds) {
    const std::size_t begin = f.val_begin == 0 ? 0 : f.val_begin - 1;
    const std::size_t end = f.val_end - 1;
    if (begin < min_train || end > d.train_rows) continue;
    const ReservoirModel base = factory.make(rc, seed);
    const SampledSeries train = slice_rows(d.task.shifted, 0, begin);
    const std::size_t wo = std::min(washout, begin / 4);
    const ReservoirModel m =
        train_readout(base, train, *train.targets, lambda, wo).model;
    sum += eval_reservoir_window(d, m, begin, end).rmse;
    ++used;
  }
  if (used == 0) throw std::runtime_error("cv: no usable folds");
  return sum / static_cast<double>(used);
}

}  // namespace

std::vector<TableRow> run_table2(const Table2Config& cfg, std::ostream* log) {
  RngStream root(cfg.seed);

  Table2Data d;
  if (!cfg.csv_path.empty()) {
    d.raw = load_timestamped_csv(cfg.csv_path);
    if (log) *log << "loaded " << d.raw.length() << " rows\n";
  } else {
    d.raw = make_cave_standin(cfg.standin_len, root.split(11).next_u64());
    if (log) *log << "using synthetic timestamped stand-in\n";
  }
  const std::size_t need = cfg.train_len + cfg.val_len + cfg.test_len;
  if (d.raw.length() < need)
    throw std::invalid_argument("table2: series shorter than the split");
  if (d.raw.length() > need) d.raw = slice_rows(d.raw, 0, need);

  const double train_frac =
      static_cast<double>(cfg.train_len) / static_cast<double>(need);
  const double val_frac =
      static_cast<double>(cfg.val_len) / static_cast<double>(need);
  d.task = make_predict_task(d.raw, train_frac, val_frac);
  d.train_rows = d.task.train_end;                       // 1699
  d.val_rows_end = d.train_rows + cfg.val_len;           // 1749
  d.test_rows_end = d.val_rows_end + cfg.test_len;       // 1799

  const TimeTransform lin = fit_task_transform(TimeScale::Linear, d.task);
  const TimeTransform ex = fit_task_transform(TimeScale::Exp, d.task, 1.0);

  ReservoirFactory factory;
  std::vector<TableRow> rows;

  auto reservoir_cfg = [&](ReservoirVariant v, const GridCell& c,
                           const TimeTransform& tf) {
    ReservoirConfig rc;
    rc.variant = v;
    rc.n_units = cfg.esn_units;
    rc.n_in = 1;
    rc.n_out = 1;
    rc.alpha = c.alpha;
    rc.radius = c.radius;
    rc.input_scaling = c.input_scaling;
    rc.transform = tf;
    return rc;
  };

  auto fit_reservoir = [&](const ReservoirConfig& rc, double lambda,
                           std::uint64_t seed, std::size_t train_rows) {
    const ReservoirModel base = factory.make(rc, seed);
    const SampledSeries train = slice_rows(d.task.shifted, 0, train_rows);
    const std::size_t wo = std::min(cfg.washout, train_rows / 4);
    return train_readout(base, train, *train.targets, lambda, wo).model;
  };

  // --- reservoir rows, standard validation and temporal CV ---------------
  auto esn_row = [&](ReservoirVariant variant, const TimeTransform& tf,
                     bool use_cv, const std::string& name,
                     const std::string& tf_name, std::uint64_t salt) {
    const std::uint64_t tune_seed = root.split(salt).next_u64();
    const GridOutcome tuned = grid_search(cfg.esn_grid, [&](const GridCell& c) {
      const ReservoirConfig rc = reservoir_cfg(variant, c, tf);
      if (use_cv)
        return cv_mean_rmse(d, factory, rc, c.lambda, tune_seed, cfg.fold_len,
                            cfg.min_fold_train, cfg.washout);
      const ReservoirModel m =
          fit_reservoir(rc, c.lambda, tune_seed, d.train_rows);
      return eval_reservoir_window(d, m, d.train_rows, d.val_rows_end).rmse;
    });

    TableRow row;
    row.model = name;
    row.transform = tf_name;
    row.validation = use_cv ? "cv" : "standard";
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.seeds; ++rep) {
      const std::uint64_t seed = root.split(salt).split(1000 + rep).next_u64();
      const ReservoirConfig rc = reservoir_cfg(variant, tuned.best, tf);
      double val_rmse;
      if (use_cv)
        val_rmse = cv_mean_rmse(d, factory, rc, tuned.best.lambda, seed,
                                cfg.fold_len, cfg.min_fold_train, cfg.washout);
      else {
        const ReservoirModel m =
            fit_reservoir(rc, tuned.best.lambda, seed, d.train_rows);
        val_rmse = eval_reservoir_window(d, m, d.train_rows, d.val_rows_end).rmse;
      }
      // Testing: readout recomputed from the whole training region, primer
      // teacher-forced through the validation window.
      const ReservoirModel m =
          fit_reservoir(rc, tuned.best.lambda, seed, d.train_rows);
      const WindowScore ts = eval_reservoir_window(d, m, d.val_rows_end,
                                                   d.test_rows_end);
      if (rep == 0) row.params = m.w_out.size();
      row.per_seed_val.push_back(val_rmse);
      row.per_seed.push_back(ts.rmse);
      row.per_seed_mape.push_back(ts.mape);
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.seeds);
    row.val_rmse = aggregate(row.per_seed_val);
    row.test_rmse = aggregate(row.per_seed);
    row.test_mape = aggregate(row.per_seed_mape);
    if (log)
      *log << name << " (" << tf_name << ", " << row.validation
           << "): val " << row.val_rmse.mean << " test " << row.test_rmse.mean
           << " mape " << row.test_mape.mean << "\n";
    rows.push_back(std::move(row));
  };

  // --- interpolation baselines: train and predict on a regular grid, then
  // map predictions back to the irregular test times -----------------------
  const double interp_dt =
      (d.raw.timestamps[cfg.train_len - 1] - d.raw.timestamps[0]) /
      static_cast<double>(cfg.train_len - 1);
  // Regularized history covering train+val; its own normalizer/shift.
  Table2Data rd;
  {
    const SampledSeries hist_raw =
        slice_rows(d.raw, 0, cfg.train_len + cfg.val_len);
    const SampledSeries reg = regularize_by_interpolation(hist_raw, interp_dt);
    const std::size_t reg_train =
        static_cast<std::size_t>(
            std::floor((d.raw.timestamps[cfg.train_len - 1] -
                        reg.timestamps.front()) /
                       interp_dt)) +
        1;
    rd.raw = reg;
    const double tf = static_cast<double>(reg_train) /
                      static_cast<double>(reg.length());
    rd.task = make_predict_task(reg, tf, 1.0 - tf);
    rd.train_rows = rd.task.train_end;
    rd.val_rows_end = rd.task.shifted.length();
  }

  // Closed-loop continuation on the regular grid, re-interpolated onto the
  // true test times and scored in raw units.
  auto score_interp_test = [&](const SampledSeries& pred_norm) {
    SampledSeries pred = pred_norm;
    denormalize_values(rd.task.norm, pred.values);
    SampledSeries anchored;
    anchored.timestamps.push_back(rd.task.shifted.timestamps.back());
    anchored.values = DenseMatrix(pred.length() + 1, 1);
    anchored.values(0, 0) = rd.raw.values(rd.raw.length() - 1, 0);
    for (std::size_t i = 0; i < pred.length(); ++i) {
      anchored.timestamps.push_back(pred.timestamps[i]);
      anchored.values(i + 1, 0) = pred.values(i, 0);
    }
    std::vector<double> test_times(
        d.raw.timestamps.begin() + (cfg.train_len + cfg.val_len),
        d.raw.timestamps.end());
    const SampledSeries at_test = linear_interpolate_at(anchored, test_times);
    const DenseMatrix truth =
        window_truth_raw(d, d.val_rows_end, d.test_rows_end);
    return evaluate_metrics(at_test.values, truth);
  };

  const auto interp_gen_count = [&] {
    const double t_last_test = d.raw.timestamps[need - 1];
    const double reg_end = rd.task.shifted.timestamps.back();
    return static_cast<std::size_t>(
               std::ceil((t_last_test - reg_end) / interp_dt)) +
           1;
  }();

  auto interp_esn_row = [&](bool use_cv, std::uint64_t salt) {
    const double dt = interp_dt;
    const TimeTransform none{TimeScale::Linear, dt};
    const std::uint64_t tune_seed = root.split(salt).next_u64();
    const GridOutcome tuned = grid_search(cfg.esn_grid, [&](const GridCell& c) {
      const ReservoirConfig rc = reservoir_cfg(ReservoirVariant::ESN, c, none);
      if (use_cv)
        return cv_mean_rmse(rd, factory, rc, c.lambda, tune_seed, cfg.fold_len,
                            cfg.min_fold_train, cfg.washout);
      const ReservoirModel base = factory.make(rc, tune_seed);
      const SampledSeries train = slice_rows(rd.task.shifted, 0, rd.train_rows);
      const ReservoirModel m =
          train_readout(base, train, *train.targets, c.lambda,
                        std::min(cfg.washout, rd.train_rows / 4))
              .model;
      return eval_reservoir_window(rd, m, rd.train_rows, rd.val_rows_end).rmse;
    });

    TableRow row;
    row.model = "interp_esn";
    row.transform = "-";
    row.validation = use_cv ? "cv" : "standard";
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.seeds; ++rep) {
      const std::uint64_t seed = root.split(salt).split(1000 + rep).next_u64();
      const ReservoirConfig rc =
          reservoir_cfg(ReservoirVariant::ESN, tuned.best, none);
      double val_rmse;
      if (use_cv)
        val_rmse = cv_mean_rmse(rd, factory, rc, tuned.best.lambda, seed,
                                cfg.fold_len, cfg.min_fold_train, cfg.washout);
      else {
        const ReservoirModel base = factory.make(rc, seed);
        const SampledSeries train = slice_rows(rd.task.shifted, 0, rd.train_rows);
        const ReservoirModel m =
            train_readout(base, train, *train.targets, tuned.best.lambda,
                          std::min(cfg.washout, rd.train_rows / 4))
                .model;
        val_rmse =
            eval_reservoir_window(rd, m, rd.train_rows, rd.val_rows_end).rmse;
      }

      // Final model trained on the regular train region, primed over the
      // full regular history, closed loop past its end.
      const ReservoirModel base = factory.make(rc, seed);
      const SampledSeries reg_train_rows =
          slice_rows(rd.task.shifted, 0, rd.train_rows);
      const ReservoirModel m =
          train_readout(base, reg_train_rows, *reg_train_rows.targets,
                        tuned.best.lambda,
                        std::min(cfg.washout, rd.train_rows / 4))
              .model;
      std::vector<double> deltas(interp_gen_count, dt);
      const Metrics ms =
          score_interp_test(run_generative(m, rd.task.shifted, deltas));
      if (rep == 0) row.params = m.w_out.size();
      row.per_seed_val.push_back(val_rmse);
      row.per_seed.push_back(ms.rmse);
      row.per_seed_mape.push_back(ms.mape);
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.seeds);
    row.val_rmse = aggregate(row.per_seed_val);
    row.test_rmse = aggregate(row.per_seed);
    row.test_mape = aggregate(row.per_seed_mape);
    if (log)
      *log << "interp_esn (" << row.validation << "): val "
           << row.val_rmse.mean << " test " << row.test_rmse.mean << " mape "
           << row.test_mape.mean << "\n";
    rows.push_back(std::move(row));
  };

  // --- gated rows (standard validation) -----------------------------------
  auto gated_row = [&](GatedVariant variant, const TimeTransform& tf,
                       const std::string& name, const std::string& tf_name,
                       std::uint64_t salt) {
    GatedConfig gc;
    gc.variant = variant;
    gc.n_hidden = cfg.gated_hidden;
    gc.n_in = 1;
    gc.n_out = 1;
    gc.transform = tf;

    const std::vector<SampledSeries> train_items{
        slice_rows(d.task.shifted, 0, d.train_rows)};
    const std::vector<SampledSeries> val_items{
        slice_rows(d.task.shifted, 0, d.val_rows_end)};

    TableRow row;
    row.model = name;
    row.transform = tf_name;
    row.validation = "standard";
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.seeds; ++rep) {
      RngStream mr(root.split(salt).split(2000 + rep).next_u64());
      GatedModel m = init_gated(gc, mr);
      if (rep == 0) row.params = m.param_count();
      TrainConfig tc;
      tc.loss = GatedLoss::MeanSquaredError;
      tc.epochs = cfg.epochs;
      tc.batch_size = 1;
      tc.learning_rate = cfg.lr;
      tc.seed = root.split(salt).split(3000 + rep).next_u64();
      tc.val_tail = cfg.val_len;
      const TrainResult res = train(m, train_items, val_items, tc);
      const double best_val_mse = res.history[res.best_epoch].val_loss;
      row.per_seed_val.push_back(std::sqrt(best_val_mse) *
                                 d.task.norm.stddev[0]);
      const WindowScore ts =
          eval_gated_window(d, res.model, d.val_rows_end, d.test_rows_end);
      row.per_seed.push_back(ts.rmse);
      row.per_seed_mape.push_back(ts.mape);
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.seeds);
    row.val_rmse = aggregate(row.per_seed_val);
    row.test_rmse = aggregate(row.per_seed);
    row.test_mape = aggregate(row.per_seed_mape);
    if (log)
      *log << name << " (" << tf_name << "): val " << row.val_rmse.mean
           << " test " << row.test_rmse.mean << " mape " << row.test_mape.mean
           << "\n";
    rows.push_back(std::move(row));
  };

  auto interp_gated_row = [&](std::uint64_t salt) {
    GatedConfig gc;
    gc.variant = GatedVariant::GRU;
    gc.n_hidden = cfg.gated_hidden;
    gc.n_in = 1;
    gc.n_out = 1;
    gc.transform = TimeTransform{TimeScale::Linear, interp_dt};

    const std::vector<SampledSeries> train_items{
        slice_rows(rd.task.shifted, 0, rd.train_rows)};
    const std::vector<SampledSeries> val_items{rd.task.shifted};
    const std::size_t val_tail = rd.task.shifted.length() - rd.train_rows;

    TableRow row;
    row.model = "interp_gru";
    row.transform = "-";
    row.validation = "standard";
    const auto t0 = Clock::now();
    for (std::size_t rep = 0; rep < cfg.seeds; ++rep) {
      RngStream mr(root.split(salt).split(2000 + rep).next_u64());
      GatedModel m = init_gated(gc, mr);
      if (rep == 0) row.params = m.param_count();
      TrainConfig tc;
      tc.loss = GatedLoss::MeanSquaredError;
      tc.epochs = cfg.epochs;
      tc.batch_size = 1;
      tc.learning_rate = cfg.lr;
      tc.seed = root.split(salt).split(3000 + rep).next_u64();
      tc.val_tail = val_tail;
      const TrainResult res = train(m, train_items, val_items, tc);
      row.per_seed_val.push_back(
          std::sqrt(res.history[res.best_epoch].val_loss) *
          rd.task.norm.stddev[0]);
      std::vector<double> deltas(interp_gen_count, interp_dt);
      const Metrics ms = score_interp_test(
          run_generative(res.model, rd.task.shifted, deltas));
      row.per_seed.push_back(ms.rmse);
      row.per_seed_mape.push_back(ms.mape);
    }
    row.train_seconds = seconds_since(t0) / static_cast<double>(cfg.seeds);
    row.val_rmse = aggregate(row.per_seed_val);
    row.test_rmse = aggregate(row.per_seed);
    row.test_mape = aggregate(row.per_seed_mape);
    if (log)
      *log << "interp_gru: val " << row.val_rmse.mean << " test "
           << row.test_rmse.mean << " mape " << row.test_mape.mean << "\n";
    rows.push_back(std::move(row));
  };

  // Row set mirrors the published table: the CV block first, then the
  // standard-validation block.
  esn_row(ReservoirVariant::ESN, lin, true, "esn", "-", 41);
  interp_esn_row(true, 42);
  esn_row(ReservoirVariant::ESNT, ex, true, "esnt", "exp", 43);
  esn_row(ReservoirVariant::TAESN, lin, true, "taesn", "linear", 44);
  esn_row(ReservoirVariant::TAESN, ex, true, "taesn", "exp", 45);

  esn_row(ReservoirVariant::ESN, lin, false, "esn", "-", 51);
  interp_esn_row(false, 52);
  esn_row(ReservoirVariant::ESNT, lin, false, "esnt", "linear", 53);
  esn_row(ReservoirVariant::TAESN, lin, false, "taesn", "linear", 54);
  esn_row(ReservoirVariant::TAESN, ex, false, "taesn", "exp", 55);

  if (cfg.run_gated) {
    gated_row(GatedVariant::GRU, lin, "gru", "-", 61);
    interp_gated_row(64);
    gated_row(GatedVariant::GRUT, lin, "grut", "linear", 62);
    gated_row(GatedVariant::TAGRU, lin, "tagru", "linear", 63);
  }
  return rows;
}

void write_table2_csv(const std::vector<TableRow>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "model,f_dt,validation,val_rmse_mean,val_rmse_std,test_rmse_mean,"
         "test_rmse_std,test_mape_mean,test_mape_std,params,train_seconds\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%.4g\n",
                  r.model.c_str(), r.transform.c_str(), r.validation.c_str(),
                  r.val_rmse.mean, r.val_rmse.stddev, r.test_rmse.mean,
                  r.test_rmse.stddev, r.test_mape.mean, r.test_mape.stddev,
                  r.params, r.train_seconds);
    out << buf;
  }
}

void write_run_metadata(const std::string& path, const std::string& subcommand,
                        const std::string& config_json_text) {
  nlohmann::json meta;
  meta["tool"] = version_string();
  meta["subcommand"] = subcommand;
  meta["kernels"] = kern::backend_name();
  try {
    meta["config"] = nlohmann::json::parse(config_json_text);
  } catch (...) {
    meta["config_text"] = config_json_text;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << meta.dump(2) << "\n";
}

}  // namespace tarnn::bench
