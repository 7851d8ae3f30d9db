#include <cmath>
#include <fstream>
#include <ostream>

#include "bench_internal.hpp"
#include "tarnn/datagen.hpp"

namespace tarnn::bench {

std::vector<double> generative_nrmse_segments(
    const ReservoirModel& m, const SampledSeries& shifted,
    std::size_t region_begin, std::size_t region_end, std::size_t n_segments,
    std::size_t primer_len, std::size_t horizon, double cap) {
  const std::size_t need = primer_len + horizon;
  if (region_end > shifted.length() || region_begin >= region_end)
    throw std::invalid_argument("nrmse segments: bad region");
  const std::size_t avail = region_end - region_begin;
  if (avail < need)
    throw std::invalid_argument("nrmse segments: region shorter than one run");
  if (!shifted.targets)
    throw std::invalid_argument("nrmse segments: series has no targets");

  std::vector<double> out;
  out.reserve(n_segments);
  for (std::size_t i = 0; i < n_segments; ++i) {
    const std::size_t offset =
        n_segments <= 1
            ? 0
            : (i * (avail - need)) / (n_segments - 1);
    const std::size_t s = region_begin + offset;

    double score = cap;
    try {
      const SampledSeries primer = slice_rows(shifted, s, s + primer_len);
      std::vector<double> deltas(horizon);
      for (std::size_t k = 0; k < horizon; ++k)
        deltas[k] = shifted.timestamps[s + primer_len + k] -
                    shifted.timestamps[s + primer_len + k - 1];
      const SampledSeries pred = run_generative(m, primer, deltas);

      DenseMatrix truth(horizon, shifted.targets->cols());
      for (std::size_t k = 0; k < horizon; ++k)
        for (std::size_t j = 0; j < truth.cols(); ++j)
          truth(k, j) = (*shifted.targets)(s + primer_len + k, j);
      const double nrmse = evaluate_metrics(pred.values, truth).nrmse;
      if (std::isfinite(nrmse)) score = std::min(nrmse, cap);
    } catch (const std::exception&) {
      // divergence is recorded, not propagated
    }
    out.push_back(score);
  }
  return out;
}

namespace {

SampledSeries sweep_series(const SweepConfig& cfg, double pi,
                           const SampledSeries* mg_fine) {
  if (cfg.attractor == "lorenz") {
    LorenzConfig lc;
    lc.n_steps = cfg.n_steps;
    lc.pi = pi;
    lc.seed = cfg.data_seed;
    return generate_lorenz(lc);
  }
  return irregularize_mg(*mg_fine, pi, cfg.data_seed, cfg.n_steps);
}

}  // namespace

namespace {

SampledSeries make_mg_fine(const SweepConfig& cfg) {
  double max_pi = 0.0;
  for (double p : cfg.pi_values) max_pi = std::max(max_pi, p);
  MackeyGlassConfig mc;
  mc.n_steps = static_cast<std::size_t>(
      std::ceil(static_cast<double>(cfg.n_steps) * (1.0 + max_pi) / mc.fine_dt)) +
      256;
  return generate_mackey_glass(mc);
}

}  // namespace

SweepResult irregularity_sweep(const SweepConfig& cfg, std::ostream* log) {
  if (cfg.pi_values.empty())
    throw std::invalid_argument("sweep: no pi values");

  // Mackey-Glass shares one fine-grid integration across every pi.
  SampledSeries mg_fine;
  if (cfg.attractor == "mackey_glass") {
    mg_fine = make_mg_fine(cfg);
  } else if (cfg.attractor != "lorenz") {
    throw std::invalid_argument("sweep: unknown attractor " + cfg.attractor);
  }

  ReservoirFactory factory;
  const std::size_t n_dims = cfg.attractor == "lorenz" ? 3 : 1;

  auto base_config = [&](ReservoirVariant v, const GridCell& c,
                         const TimeTransform& tf) {
    ReservoirConfig rc;
    rc.variant = v;
    rc.n_units = cfg.n_units;
    rc.n_in = n_dims;
    rc.n_out = n_dims;
    rc.alpha = c.alpha;
    rc.radius = c.radius;
    rc.input_scaling = c.input_scaling;
    rc.transform = tf;
    return rc;
  };

  auto fit_on_train = [&](const PredictTask& task, const ReservoirConfig& rc,
                          double lambda) {
    const ReservoirModel m = factory.make(rc, cfg.model_seed);
    const SampledSeries train = slice_rows(task.shifted, 0, task.train_end);
    const std::size_t washout = std::min(cfg.washout, task.train_end / 4);
    return train_readout(m, train, *train.targets, lambda, washout).model;
  };

  // Hyperparameters are searched once on the regular-time (pi = 0) data;
  // the two variants are identical there, so one search serves both.
  const PredictTask task0 =
      make_predict_task(sweep_series(cfg, 0.0, &mg_fine), 0.6, 0.2);
  const TimeTransform tf0 = fit_task_transform(TimeScale::Linear, task0);

  const GridOutcome tuned = grid_search(
      cfg.tune_grid,
      [&](const GridCell& c) {
        const ReservoirModel m = fit_on_train(
            task0, base_config(ReservoirVariant::ESN, c, tf0), c.lambda);
        const auto scores = generative_nrmse_segments(
            m, task0.shifted, task0.train_end, task0.val_end, cfg.tune_segments,
            cfg.primer_len, cfg.horizon, cfg.divergence_cap);
        return aggregate(scores).median;
      },
      cfg.n_threads);
  if (log)
    *log << "tuned: alpha=" << tuned.best.alpha << " radius=" << tuned.best.radius
         << " lambda=" << tuned.best.lambda
         << " input_scaling=" << tuned.best.input_scaling
         << " val_median_nrmse=" << tuned.best_score << "\n";

  SweepResult res;
  res.tuned = tuned.best;

  // At each pi the reservoir weights stay fixed; the readout and the gap
  // normalization are refit on that pi's training region, mirroring the
  // per-pi model initialization of the protocol.
  for (double pi : cfg.pi_values) {
    const PredictTask task =
        make_predict_task(sweep_series(cfg, pi, &mg_fine), 0.6, 0.2);
    const TimeTransform tf = fit_task_transform(TimeScale::Linear, task);

    SweepRow row;
    row.pi = pi;
    for (const ReservoirVariant v :
         {ReservoirVariant::ESN, ReservoirVariant::TAESN}) {
      const ReservoirModel m =
          fit_on_train(task, base_config(v, tuned.best, tf), tuned.best.lambda);
      const auto scores = generative_nrmse_segments(
          m, task.shifted, task.val_end, task.shifted.length(), cfg.n_segments,
          cfg.primer_len, cfg.horizon, cfg.divergence_cap);
      if (v == ReservoirVariant::ESN) {
        row.esn_values = scores;
        row.esn = aggregate(scores);
      } else {
        row.taesn_values = scores;
        row.taesn = aggregate(scores);
      }
    }
    if (log)
      *log << "pi=" << pi << " esn_median=" << row.esn.median
           << " taesn_median=" << row.taesn.median << "\n";
    res.rows.push_back(std::move(row));
  }
  return res;
}

GridOutcome sweep_grid_search(const SweepConfig& cfg, std::ostream* log) {
  SweepConfig one = cfg;
  one.pi_values = {cfg.pi_values.empty() ? 0.0 : cfg.pi_values.front()};

  SampledSeries mg_fine;
  if (one.attractor == "mackey_glass") mg_fine = make_mg_fine(one);
  const std::size_t n_dims = one.attractor == "lorenz" ? 3 : 1;

  ReservoirFactory factory;
  const PredictTask task =
      make_predict_task(sweep_series(one, one.pi_values[0], &mg_fine), 0.6, 0.2);
  const TimeTransform tf = fit_task_transform(TimeScale::Linear, task);

  const GridOutcome out = grid_search(
      one.tune_grid,
      [&](const GridCell& c) {
        ReservoirConfig rc;
        rc.variant = ReservoirVariant::ESN;
        rc.n_units = one.n_units;
        rc.n_in = n_dims;
        rc.n_out = n_dims;
        rc.alpha = c.alpha;
        rc.radius = c.radius;
        rc.input_scaling = c.input_scaling;
        rc.transform = tf;
        const ReservoirModel base = factory.make(rc, one.model_seed);
        const SampledSeries train = slice_rows(task.shifted, 0, task.train_end);
        const std::size_t wo = std::min(one.washout, task.train_end / 4);
        const ReservoirModel m =
            train_readout(base, train, *train.targets, c.lambda, wo).model;
        const auto scores = generative_nrmse_segments(
            m, task.shifted, task.train_end, task.val_end, one.tune_segments,
            one.primer_len, one.horizon, one.divergence_cap);
        return aggregate(scores).median;
      },
      one.n_threads);
  if (log)
    *log << "best: alpha=" << out.best.alpha << " radius=" << out.best.radius
         << " lambda=" << out.best.lambda
         << " input_scaling=" << out.best.input_scaling
         << " score=" << out.best_score << "\n";
  return out;
}

void write_grid_csv(const GridOutcome& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "index,alpha,radius,lambda,input_scaling,score,error\n";
  char buf[192];
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const GridCell& c = g.cells[i];
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g,%.6g,%.10g,",
                  c.index, c.alpha, c.radius, c.lambda, c.input_scaling,
                  g.scores[i]);
    out << buf << g.errors[i] << "\n";
  }
}

void write_sweep_csv(const SweepResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "pi,model,median,min,max,mean,std\n";
  char buf[192];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.6g,esn,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  row.pi, row.esn.median, row.esn.min, row.esn.max,
                  row.esn.mean, row.esn.stddev);
    out << buf;
    std::snprintf(buf, sizeof buf, "%.6g,taesn,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  row.pi, row.taesn.median, row.taesn.min, row.taesn.max,
                  row.taesn.mean, row.taesn.stddev);
    out << buf;
  }
}

}  // namespace tarnn::bench
