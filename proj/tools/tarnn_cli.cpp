// Command-line front end: data generation, model training/evaluation, the
// irregularity sweep, grid search, and the two benchmark tables. Every run
// echoes its resolved configuration to a metadata file next to its outputs.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tarnn/bench.hpp"
#include "tarnn/datagen.hpp"
#include "tarnn/datasets.hpp"
#include "tarnn/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tarnn;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return json::parse(in);
}

bench::GridAxes parse_grid(const json& j) {
  bench::GridAxes g;
  if (j.contains("alpha")) g.alpha = j["alpha"].get<std::vector<double>>();
  if (j.contains("radius")) g.radius = j["radius"].get<std::vector<double>>();
  if (j.contains("lambda")) g.lambda = j["lambda"].get<std::vector<double>>();
  if (j.contains("input_scaling"))
    g.input_scaling = j["input_scaling"].get<std::vector<double>>();
  if (j.contains("lr")) g.lr = j["lr"].get<std::vector<double>>();
  if (j.contains("hidden"))
    g.hidden = j["hidden"].get<std::vector<std::size_t>>();
  return g;
}

// Default search ranges; every axis can be overridden from the config.
bench::GridAxes default_esn_grid() {
  bench::GridAxes g;
  g.alpha = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  g.radius = {0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
  g.lambda = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  g.input_scaling = {0.1, 0.5, 1.0};
  return g;
}

void write_meta(const std::string& dir, const std::string& sub, const json& j) {
  fs::create_directories(dir);
  bench::write_run_metadata(dir + "/run_meta.json", sub, j.dump());
}

int cmd_generate(const std::string& config, const std::string& out) {
  const json j = load_json(config);
  const std::string type = j.at("type").get<std::string>();
  SampledSeries s;
  if (type == "lorenz") {
    LorenzConfig c;
    c.n_steps = j.value("n_steps", std::size_t{10000});
    c.pi = j.value("pi", 0.0);
    c.base_dt = j.value("base_dt", 0.01);
    c.seed = j.value("seed", std::uint64_t{0});
    c.transient = j.value("transient", std::size_t{1000});
    s = generate_lorenz(c);
  } else if (type == "mackey_glass") {
    MackeyGlassConfig c;
    c.n_steps = j.value("n_steps", std::size_t{100000});
    c.transient = j.value("transient", std::size_t{10000});
    s = generate_mackey_glass(c);
  } else if (type == "mg_irregular") {
    MackeyGlassConfig c;
    const auto n_samples = j.value("n_samples", std::size_t{10000});
    const double pi = j.value("pi", 0.0);
    c.n_steps = j.value(
        "fine_steps",
        static_cast<std::size_t>(std::ceil(
            static_cast<double>(n_samples) * (1.0 + pi) / c.fine_dt)) + 256);
    s = irregularize_mg(generate_mackey_glass(c), pi,
                        j.value("seed", std::uint64_t{0}), n_samples);
  } else if (type == "cave_standin") {
    s = make_cave_standin(j.value("n", std::size_t{1800}),
                          j.value("seed", std::uint64_t{0}));
  } else if (type == "gesture_standin") {
    const LabeledSet set =
        make_gesture_standin(j.value("n", std::size_t{890}),
                             j.value("length", std::size_t{900}),
                             j.value("seed", std::uint64_t{0}));
    write_label_first_archive(set, out);
    write_meta(fs::path(out).parent_path().string().empty()
                   ? "."
                   : fs::path(out).parent_path().string(),
               "generate", j);
    std::cout << "wrote " << set.items.size() << " samples to " << out << "\n";
    return 0;
  } else {
    throw std::runtime_error("unknown generate type: " + type);
  }
  write_series_csv(s, out);
  write_meta(fs::path(out).parent_path().string().empty()
                 ? "."
                 : fs::path(out).parent_path().string(),
             "generate", j);
  std::cout << "wrote " << s.length() << " samples to " << out << "\n";
  return 0;
}

bench::SweepConfig parse_sweep(const json& j) {
  bench::SweepConfig c;
  c.attractor = j.value("attractor", std::string("lorenz"));
  c.n_units = j.value("n_units", std::size_t{500});
  if (j.contains("pi_values"))
    c.pi_values = j["pi_values"].get<std::vector<double>>();
  else if (c.attractor == "mackey_glass")
    c.pi_values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  c.n_segments = j.value("n_segments", std::size_t{50});
  c.horizon = j.value("horizon", std::size_t{200});
  c.primer_len = j.value("primer_len", std::size_t{100});
  c.n_steps = j.value("n_steps", std::size_t{10000});
  c.data_seed = j.value("data_seed", std::uint64_t{1});
  c.model_seed = j.value("model_seed", std::uint64_t{7});
  c.tune_segments = j.value("tune_segments", std::size_t{8});
  c.divergence_cap = j.value("divergence_cap", 2.0);
  c.washout = j.value("washout", std::size_t{100});
  c.n_threads = j.value("threads", std::size_t{1});
  if (j.contains("grid")) c.tune_grid = parse_grid(j["grid"]);
  else {
    c.tune_grid.alpha = {0.3, 0.6, 1.0};
    c.tune_grid.radius = {0.8, 1.0, 1.2};
    c.tune_grid.lambda = {1e-7, 1e-5, 1e-3};
    c.tune_grid.input_scaling = {0.5, 1.0};
  }
  return c;
}

int cmd_sweep(const std::string& config, const std::string& out_dir) {
  const json j = load_json(config);
  const bench::SweepConfig c = parse_sweep(j);
  fs::create_directories(out_dir);
  const bench::SweepResult r = bench::irregularity_sweep(c, &std::cout);
  bench::write_sweep_csv(r, out_dir + "/sweep.csv");
  write_meta(out_dir, "sweep", j);
  std::cout << "wrote " << out_dir << "/sweep.csv\n";
  return 0;
}

int cmd_gridsearch(const std::string& config, const std::string& out_dir) {
  const json j = load_json(config);
  bench::SweepConfig c = parse_sweep(j);
  c.pi_values = {j.value("pi", 0.0)};
  fs::create_directories(out_dir);

  const bench::GridOutcome g = bench::sweep_grid_search(c, &std::cout);
  bench::write_grid_csv(g, out_dir + "/grid.csv");
  write_meta(out_dir, "gridsearch", j);
  json best;
  best["alpha"] = g.best.alpha;
  best["radius"] = g.best.radius;
  best["lambda"] = g.best.lambda;
  best["input_scaling"] = g.best.input_scaling;
  best["score"] = g.best_score;
  std::ofstream bj(out_dir + "/best.json");
  bj << best.dump(2) << "\n";
  std::cout << "wrote " << out_dir << "/grid.csv and best.json\n";
  return 0;
}

bench::Table1Config parse_table1(const json& j) {
  bench::Table1Config c;
  c.train_archive = j.value("train_archive", std::string());
  c.test_archive = j.value("test_archive", std::string());
  c.standin_train = j.value("standin_train", std::size_t{890});
  c.standin_test = j.value("standin_test", std::size_t{3580});
  c.standin_len = j.value("standin_len", std::size_t{900});
  c.esn_units = j.value("esn_units", std::size_t{500});
  c.gated_hidden = j.value("gated_hidden", std::size_t{100});
  c.epochs = j.value("epochs", std::size_t{100});
  c.esn_seeds = j.value("esn_seeds", std::size_t{10});
  c.gated_seeds = j.value("gated_seeds", std::size_t{10});
  c.subsample_fraction = j.value("subsample_fraction", 0.10);
  c.val_fraction = j.value("val_fraction", 0.30);
  c.seed = j.value("seed", std::uint64_t{42});
  c.lr = j.value("lr", 1e-3);
  c.batch_size = j.value("batch_size", std::size_t{32});
  c.run_gated = j.value("run_gated", true);
  c.run_esn = j.value("run_esn", true);
  if (j.contains("grid")) c.esn_grid = parse_grid(j["grid"]);
  else {
    c.esn_grid.alpha = {0.3, 0.6, 1.0};
    c.esn_grid.radius = {0.7, 0.9, 1.1};
    c.esn_grid.lambda = {1e-6, 1e-4, 1e-2};
    c.esn_grid.input_scaling = {1.0};
  }
  if (j.value("quick", false)) {
    c.gated_hidden = 32;
    c.gated_seeds = 5;
  }
  return c;
}

int cmd_table1(const std::string& config, const std::string& out_dir) {
  const json j = load_json(config);
  const bench::Table1Config c = parse_table1(j);
  fs::create_directories(out_dir);
  const auto rows = bench::run_table1(c, &std::cout);
  bench::write_table1_csv(rows, out_dir + "/table1.csv");
  write_meta(out_dir, "table1", j);
  std::cout << "wrote " << out_dir << "/table1.csv\n";
  return 0;
}

bench::Table2Config parse_table2(const json& j) {
  bench::Table2Config c;
  c.csv_path = j.value("csv", std::string());
  c.standin_len = j.value("standin_len", std::size_t{1800});
  c.train_len = j.value("train_len", std::size_t{1700});
  c.val_len = j.value("val_len", std::size_t{50});
  c.test_len = j.value("test_len", std::size_t{50});
  c.esn_units = j.value("esn_units", std::size_t{50});
  c.gated_hidden = j.value("gated_hidden", std::size_t{30});
  c.seeds = j.value("seeds", std::size_t{10});
  c.epochs = j.value("epochs", std::size_t{100});
  c.seed = j.value("seed", std::uint64_t{42});
  c.lr = j.value("lr", 1e-3);
  c.fold_len = j.value("fold_len", std::size_t{50});
  c.min_fold_train = j.value("min_fold_train", std::size_t{100});
  c.washout = j.value("washout", std::size_t{100});
  c.run_gated = j.value("run_gated", true);
  if (j.contains("grid")) c.esn_grid = parse_grid(j["grid"]);
  else {
    c.esn_grid.alpha = {0.2, 0.4, 0.6, 0.8, 1.0};
    c.esn_grid.radius = {0.7, 0.9, 1.1};
    c.esn_grid.lambda = {1e-7, 1e-5, 1e-3};
    c.esn_grid.input_scaling = {0.5, 1.0};
  }
  return c;
}

int cmd_table2(const std::string& config, const std::string& out_dir) {
  const json j = load_json(config);
  const bench::Table2Config c = parse_table2(j);
  fs::create_directories(out_dir);
  const auto rows = bench::run_table2(c, &std::cout);
  bench::write_table2_csv(rows, out_dir + "/table2.csv");
  write_meta(out_dir, "table2", j);
  std::cout << "wrote " << out_dir << "/table2.csv\n";
  return 0;
}

int cmd_train(const std::string& config, const std::string& model_out,
              const std::string& out_dir) {
  const json j = load_json(config);
  fs::create_directories(out_dir);
  const std::string family = j.at("family").get<std::string>();
  const std::string data_path = j.at("data").get<std::string>();
  const SampledSeries raw = read_series_csv(data_path);

  const double train_frac = j.value("train_fraction", 0.6);
  const double val_frac = j.value("val_fraction", 0.2);
  const std::size_t train_raw =
      static_cast<std::size_t>(train_frac * static_cast<double>(raw.length()));
  const Normalizer norm = fit_normalizer(raw, 0, train_raw);
  const SampledSeries shifted = shift_for_prediction(apply_normalizer(norm, raw));
  const std::size_t train_rows = train_raw - 1;
  const std::size_t val_rows_end = std::min(
      static_cast<std::size_t>((train_frac + val_frac) *
                               static_cast<double>(raw.length())),
      shifted.length());

  const auto deltas = shifted.deltas();
  const TimeTransform tf = fit_transform(
      timescale_from_string(j.value("transform", std::string("linear"))),
      std::span<const double>(deltas.data(), std::min(train_rows, deltas.size())),
      j.value("exp_scale", 1.0));

  if (family == "reservoir") {
    ReservoirConfig rc;
    rc.variant = reservoir_variant_from_string(j.value("variant", std::string("esn")));
    rc.n_units = j.value("n_units", std::size_t{100});
    rc.n_in = raw.dims();
    rc.n_out = raw.dims();
    rc.alpha = j.value("alpha", 1.0);
    rc.radius = j.value("radius", 0.9);
    rc.input_scaling = j.value("input_scaling", 1.0);
    rc.transform = tf;
    RngStream rng(j.value("seed", std::uint64_t{0}));
    const ReservoirModel base = init_reservoir(rc, rng);
    const SampledSeries train = slice_rows(shifted, 0, train_rows);
    const ReadoutFit fit =
        train_readout(base, train, *train.targets, j.value("lambda", 1e-6),
                      j.value("washout", std::size_t{100}));
    save_model(fit.model, model_out);
    std::cout << "train_rmse " << fit.train_rmse << "\n";
  } else if (family == "gated") {
    GatedConfig gc;
    gc.variant = gated_variant_from_string(j.value("variant", std::string("gru")));
    gc.n_hidden = j.value("hidden", std::size_t{30});
    gc.n_in = raw.dims();
    gc.n_out = raw.dims();
    gc.transform = tf;
    gc.raw_dt_input = j.value("raw_dt", false);
    RngStream rng(j.value("seed", std::uint64_t{0}));
    GatedModel m = init_gated(gc, rng);
    TrainConfig tc;
    tc.loss = GatedLoss::MeanSquaredError;
    tc.epochs = j.value("epochs", std::size_t{100});
    tc.batch_size = 1;
    tc.learning_rate = j.value("lr", 1e-3);
    tc.seed = j.value("seed", std::uint64_t{0});
    tc.val_tail = val_rows_end - train_rows;
    const std::vector<SampledSeries> tr{slice_rows(shifted, 0, train_rows)};
    const std::vector<SampledSeries> va{slice_rows(shifted, 0, val_rows_end)};
    const TrainResult res = train(m, tr, va, tc);
    save_model(res.model, model_out);
    write_history_csv(res.history, out_dir + "/history.csv");
    std::cout << "best_epoch " << res.best_epoch << " val_loss "
              << res.history[res.best_epoch].val_loss << "\n";
  } else {
    throw std::runtime_error("unknown family: " + family);
  }
  write_meta(out_dir, "train", j);
  std::cout << "wrote " << model_out << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_path, std::size_t generative) {
  const SampledSeries raw = read_series_csv(data_path);
  // Evaluation mirrors training: normalized by the leading 60%, one-step
  // view, teacher-forced errors over the remainder.
  const std::size_t train_raw =
      static_cast<std::size_t>(0.6 * static_cast<double>(raw.length()));
  const Normalizer norm = fit_normalizer(raw, 0, train_raw);
  const SampledSeries shifted = shift_for_prediction(apply_normalizer(norm, raw));

  json out;
  const ModelFamily fam = peek_model_family(model_path);
  if (fam == ModelFamily::Reservoir) {
    const ReservoirModel m = load_reservoir(model_path);
    const StateTrajectory traj = run_teacher_forced(m, shifted);
    DenseMatrix pred(shifted.length(), m.cfg.n_out);
    Vector feat(m.n_features());
    const auto deltas = shifted.deltas();
    for (std::size_t n = 0; n < shifted.length(); ++n) {
      feat[0] = 1.0;
      for (std::size_t i = 0; i < m.cfg.n_in; ++i)
        feat[1 + i] = shifted.values(n, i);
      if (m.cfg.variant == ReservoirVariant::ESNT)
        feat[1 + m.cfg.n_in] =
            n == 0 ? 1.0 : m.cfg.transform.apply(deltas[n - 1]);
      for (std::size_t i = 0; i < m.cfg.n_units; ++i)
        feat[1 + m.n_in_eff() + i] = traj.states(n, i);
      const Vector y = matvec(m.w_out, feat);
      for (std::size_t o = 0; o < y.size(); ++o) pred(n, o) = y[o];
    }
    const Metrics ms = evaluate_metrics(pred, *shifted.targets);
    out["one_step"] = {{"rmse", ms.rmse}, {"nrmse", ms.nrmse}, {"mape", ms.mape}};
    if (generative > 0 && shifted.length() > generative + 2) {
      const auto scores = bench::generative_nrmse_segments(
          m, shifted, 0, shifted.length(), 1,
          shifted.length() - generative - 1, generative, 1e9);
      out["generative_nrmse"] = scores[0];
    }
  } else {
    const GatedModel m = load_gated(model_path);
    const DenseMatrix pred = predict_sequence(m, shifted);
    const Metrics ms = evaluate_metrics(pred, *shifted.targets);
    out["one_step"] = {{"rmse", ms.rmse}, {"nrmse", ms.nrmse}, {"mape", ms.mape}};
  }
  std::ofstream o(out_path);
  o << out.dump(2) << "\n";
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-adaptive recurrent network benchmark toolkit"};
  app.require_subcommand(1);

  std::string config, out = "out.csv", out_dir = "runs", model_path,
              data_path, model_out = "model.txt";
  std::size_t generative = 0;

  auto* gen = app.add_subcommand("generate", "generate a dataset CSV");
  gen->add_option("--config", config)->required();
  gen->add_option("--out", out)->required();

  auto* sweep = app.add_subcommand("sweep", "irregularity sweep");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--out-dir", out_dir);

  auto* grid = app.add_subcommand("gridsearch", "hyperparameter search");
  grid->add_option("--config", config)->required();
  grid->add_option("--out-dir", out_dir);

  auto* train_cmd = app.add_subcommand("train", "train one model");
  train_cmd->add_option("--config", config)->required();
  train_cmd->add_option("--model-out", model_out);
  train_cmd->add_option("--out-dir", out_dir);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--data", data_path)->required();
  eval_cmd->add_option("--out", out);
  eval_cmd->add_option("--generative", generative);

  auto* t1 = app.add_subcommand("table1", "gesture classification table");
  t1->add_option("--config", config)->required();
  t1->add_option("--out-dir", out_dir);

  auto* t2 = app.add_subcommand("table2", "timestamped prediction table");
  t2->add_option("--config", config)->required();
  t2->add_option("--out-dir", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config, out);
    if (sweep->parsed()) return cmd_sweep(config, out_dir);
    if (grid->parsed()) return cmd_gridsearch(config, out_dir);
    if (train_cmd->parsed()) return cmd_train(config, model_out, out_dir);
    if (eval_cmd->parsed()) return cmd_eval(model_path, data_path, out, generative);
    if (t1->parsed()) return cmd_table1(config, out_dir);
    if (t2->parsed()) return cmd_table2(config, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
