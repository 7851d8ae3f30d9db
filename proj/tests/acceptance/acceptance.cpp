// Acceptance suite: one check per published claim the artifact reproduces,
// each printed as a PASS/FAIL line. Run everything or a single criterion
// with --criterion N.
//
// Heavy table criteria default to the quick tier (smaller gated models,
// fewer repetitions, ordering assertions only); set TARNN_ACCEPT_FULL=1
// for the full-scale bands. Real datasets are picked up from
// TARNN_UWAVE_TRAIN / TARNN_UWAVE_TEST / TARNN_CAVE_CSV or from ./data/;
// the synthetic stand-ins are used otherwise.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "../oracles/ridge_oracle.hpp"
#include "tarnn/bench.hpp"
#include "tarnn/datagen.hpp"
#include "tarnn/datasets.hpp"
#include "tarnn/gated.hpp"
#include "tarnn/numerics.hpp"
#include "tarnn/reservoir.hpp"

using namespace tarnn;
namespace fs = std::filesystem;

namespace {

struct Checker {
  int criterion;
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("FAILED: " + what);
    } else {
      notes.push_back("ok: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

bool full_tier() {
  const char* v = std::getenv("TARNN_ACCEPT_FULL");
  return v && std::strcmp(v, "0") != 0;
}

SampledSeries random_series(std::size_t len, std::size_t dims, RngStream& rng,
                            bool regular) {
  SampledSeries s;
  s.timestamps.resize(len);
  s.values = DenseMatrix(len, dims);
  for (std::size_t i = 0; i < len; ++i) {
    s.timestamps[i] = regular ? 2.0 * static_cast<double>(i)
                              : (i == 0 ? 0.0 : s.timestamps[i - 1]) +
                                    (i == 0 ? 0.0 : rng.uniform(0.2, 1.4));
    for (std::size_t j = 0; j < dims; ++j) s.values(i, j) = rng.uniform(-1, 1);
  }
  if (!regular)
    for (std::size_t i = 1; i < len; ++i)
      if (s.timestamps[i] <= s.timestamps[i - 1])
        s.timestamps[i] = s.timestamps[i - 1] + 0.5;
  return s;
}

// --------------------------------------------------------------------------
// 1. Regular-time fallback: the adaptive variants with unit effective steps
//    reproduce their fixed-step counterparts.
// --------------------------------------------------------------------------
void criterion1(Checker& c) {
  double worst_state = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    RngStream sr = RngStream(9000).split(seed);
    const SampledSeries s = random_series(50, 2, sr, /*regular=*/true);

    ReservoirConfig ce;
    ce.variant = ReservoirVariant::ESN;
    ce.n_units = 30;
    ce.n_in = 2;
    ce.n_out = 2;
    ce.alpha = 0.3 + 0.03 * seed;
    ReservoirConfig ct = ce;
    ct.variant = ReservoirVariant::TAESN;
    ct.transform = fit_transform(TimeScale::Linear, s.deltas());
    RngStream ra(100 + seed), rb(100 + seed);
    const ReservoirModel esn = init_reservoir(ce, ra);
    const ReservoirModel taesn = init_reservoir(ct, rb);
    const StateTrajectory a = run_teacher_forced(esn, s);
    const StateTrajectory b = run_teacher_forced(taesn, s);
    for (std::size_t i = 0; i < a.states.size(); ++i)
      worst_state = std::max(worst_state,
                             std::fabs(a.states.data()[i] - b.states.data()[i]));
  }
  c.expect(worst_state <= 1e-12,
           "reservoir trajectories agree within 1e-12 (worst " +
               std::to_string(worst_state) + ")");

  double worst_out = 0.0, worst_grad = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    RngStream sr = RngStream(9100).split(seed);
    SampledSeries s = random_series(30, 2, sr, /*regular=*/true);
    s.label = seed % 3;

    GatedConfig cg;
    cg.variant = GatedVariant::GRU;
    cg.n_hidden = 8;
    cg.n_in = 2;
    cg.n_out = 3;
    GatedConfig cta = cg;
    cta.variant = GatedVariant::TAGRU;
    cta.transform = fit_transform(TimeScale::Linear, s.deltas());
    RngStream ra(200 + seed), rb(200 + seed);
    const GatedModel gru = init_gated(cg, ra);
    const GatedModel tagru = init_gated(cta, rb);

    const ForwardResult fa = forward(gru, s);
    const ForwardResult fb = forward(tagru, s);
    for (std::size_t i = 0; i < fa.outputs.size(); ++i)
      worst_out = std::max(worst_out, std::fabs(fa.outputs.data()[i] -
                                                fb.outputs.data()[i]));

    // softmax cross-entropy gradient at the last step
    auto dy_of = [&](const ForwardResult& r, const GatedModel& m) {
      DenseMatrix dy(s.length(), m.cfg.n_out);
      const std::size_t last = s.length() - 1;
      double mx = r.outputs(last, 0);
      for (std::size_t o = 1; o < m.cfg.n_out; ++o)
        mx = std::max(mx, r.outputs(last, o));
      double z = 0.0;
      for (std::size_t o = 0; o < m.cfg.n_out; ++o)
        z += std::exp(r.outputs(last, o) - mx);
      for (std::size_t o = 0; o < m.cfg.n_out; ++o)
        dy(last, o) = std::exp(r.outputs(last, o) - mx) / z -
                      (static_cast<int>(o) == *s.label ? 1.0 : 0.0);
      return dy;
    };
    const GatedGrads ga = backward(gru, fa.cache, dy_of(fa, gru));
    const GatedGrads gb = backward(tagru, fb.cache, dy_of(fb, tagru));
    const DenseMatrix* mats_a[] = {&ga.w_z, &ga.u_z, &ga.w_r, &ga.u_r,
                                   &ga.w_h, &ga.u_h, &ga.w_out};
    const DenseMatrix* mats_b[] = {&gb.w_z, &gb.u_z, &gb.w_r, &gb.u_r,
                                   &gb.w_h, &gb.u_h, &gb.w_out};
    for (int k = 0; k < 7; ++k)
      for (std::size_t i = 0; i < mats_a[k]->size(); ++i)
        worst_grad = std::max(worst_grad, std::fabs(mats_a[k]->data()[i] -
                                                    mats_b[k]->data()[i]));
  }
  c.expect(worst_out <= 1e-12,
           "gated forward outputs agree within 1e-12 (worst " +
               std::to_string(worst_out) + ")");
  c.expect(worst_grad <= 1e-10,
           "gated gradients agree within 1e-10 (worst " +
               std::to_string(worst_grad) + ")");
}

// --------------------------------------------------------------------------
// 2. Gradient oracle: analytic BPTT vs central finite differences.
// --------------------------------------------------------------------------
double gated_loss(const GatedModel& m, const SampledSeries& s, GatedLoss loss) {
  const ForwardResult res = forward(m, s);
  const std::size_t len = s.length();
  const std::size_t no = m.cfg.n_out;
  if (loss == GatedLoss::CrossEntropy) {
    double mx = res.outputs(len - 1, 0);
    for (std::size_t o = 1; o < no; ++o)
      mx = std::max(mx, res.outputs(len - 1, o));
    double z = 0.0;
    for (std::size_t o = 0; o < no; ++o)
      z += std::exp(res.outputs(len - 1, o) - mx);
    return mx + std::log(z) -
           res.outputs(len - 1, static_cast<std::size_t>(*s.label));
  }
  double acc = 0.0;
  for (std::size_t n = 0; n < len; ++n)
    for (std::size_t o = 0; o < no; ++o) {
      const double e = res.outputs(n, o) - (*s.targets)(n, o);
      acc += e * e;
    }
  return acc / static_cast<double>(len * no);
}

void criterion2(Checker& c) {
  const double eps = 1e-5, tol = 1e-4;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int seed = 0; seed < 5; ++seed) {
    for (const GatedVariant v :
         {GatedVariant::GRU, GatedVariant::GRUT, GatedVariant::TAGRU}) {
      RngStream mr(7000 + seed * 16 + static_cast<int>(v));
      GatedConfig cfg;
      cfg.variant = v;
      cfg.n_hidden = 8;
      cfg.n_in = 2;
      cfg.n_out = 3;
      cfg.transform = TimeTransform{TimeScale::Linear, 1.5};
      const GatedModel model = init_gated(cfg, mr);
      RngStream sr = RngStream(7100).split(seed * 16 + static_cast<int>(v));
      SampledSeries s = random_series(20, 2, sr, /*regular=*/false);
      s.label = seed % 3;
      DenseMatrix tgt(20, 3);
      for (std::size_t i = 0; i < tgt.size(); ++i)
        tgt.data()[i] = sr.uniform(-1, 1);
      s.targets = tgt;

      for (const GatedLoss loss :
           {GatedLoss::CrossEntropy, GatedLoss::MeanSquaredError}) {
        const ForwardResult res = forward(model, s);
        DenseMatrix dy(20, 3);
        if (loss == GatedLoss::CrossEntropy) {
          const std::size_t last = 19;
          double mx = res.outputs(last, 0);
          for (std::size_t o = 1; o < 3; ++o)
            mx = std::max(mx, res.outputs(last, o));
          double z = 0.0;
          for (std::size_t o = 0; o < 3; ++o)
            z += std::exp(res.outputs(last, o) - mx);
          for (std::size_t o = 0; o < 3; ++o)
            dy(last, o) = std::exp(res.outputs(last, o) - mx) / z -
                          (static_cast<int>(o) == *s.label ? 1.0 : 0.0);
        } else {
          for (std::size_t n = 0; n < 20; ++n)
            for (std::size_t o = 0; o < 3; ++o)
              dy(n, o) =
                  2.0 * (res.outputs(n, o) - (*s.targets)(n, o)) / (20.0 * 3.0);
        }
        const GatedGrads grads = backward(model, res.cache, dy);

        GatedModel probe = model;
        DenseMatrix* params[] = {&probe.w_z, &probe.u_z, &probe.w_r,
                                 &probe.u_r, &probe.w_h, &probe.u_h,
                                 &probe.w_out};
        const DenseMatrix* analytic[] = {&grads.w_z, &grads.u_z, &grads.w_r,
                                         &grads.u_r, &grads.w_h, &grads.u_h,
                                         &grads.w_out};
        for (int k = 0; k < 7; ++k) {
          for (std::size_t i = 0; i < params[k]->size(); ++i) {
            const double keep = params[k]->data()[i];
            params[k]->data()[i] = keep + eps;
            const double up = gated_loss(probe, s, loss);
            params[k]->data()[i] = keep - eps;
            const double dn = gated_loss(probe, s, loss);
            params[k]->data()[i] = keep;
            const double fd = (up - dn) / (2.0 * eps);
            const double got = analytic[k]->data()[i];
            const double rel = std::fabs(fd - got) /
                               std::max({1e-6, std::fabs(fd), std::fabs(got)});
            worst = std::max(worst, rel);
            ++checked;
          }
        }
      }
    }
  }
  c.note("checked " + std::to_string(checked) + " partial derivatives");
  c.expect(worst <= tol, "relative gradient error <= 1e-4 (worst " +
                             std::to_string(worst) + ")");
}

// --------------------------------------------------------------------------
// 3. Ridge oracle: readout training vs the naive extended-precision solve.
// --------------------------------------------------------------------------
void criterion3(Checker& c) {
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    RngStream mr(8000 + rep);
    ReservoirConfig cfg;
    cfg.variant = ReservoirVariant::ESN;
    cfg.n_units = 25;
    cfg.n_in = 2;
    cfg.n_out = 2;
    cfg.alpha = 0.7;
    const ReservoirModel m = init_reservoir(cfg, mr);
    RngStream sr = RngStream(8100).split(rep);
    SampledSeries s = random_series(220, 2, sr, /*regular=*/false);
    RngStream tr = RngStream(8200).split(rep);
    const DenseMatrix targets = random_uniform_matrix(220, 2, 1.0, tr);
    const double lambda = rep % 2 == 0 ? 0.1 : 1e-4;
    const std::size_t washout = 10;

    const ReadoutFit fit = train_readout(m, s, targets, lambda, washout);

    // independent route: rebuild the feature matrix, solve at extended
    // precision with a Gauss-Jordan inverse
    const StateTrajectory traj = run_teacher_forced(m, s);
    const std::size_t kept = 220 - washout;
    DenseMatrix feats(m.n_features(), kept), tmat(2, kept);
    const auto deltas = s.deltas();
    for (std::size_t n = washout; n < 220; ++n) {
      const std::size_t col = n - washout;
      feats(0, col) = 1.0;
      feats(1, col) = s.values(n, 0);
      feats(2, col) = s.values(n, 1);
      for (std::size_t i = 0; i < 25; ++i)
        feats(3 + i, col) = traj.states(n, i);
      tmat(0, col) = targets(n, 0);
      tmat(1, col) = targets(n, 1);
    }
    const DenseMatrix ref = oracle::ridge_naive(feats, tmat, lambda);
    const double scale = frobenius_norm(ref);
    for (std::size_t i = 0; i < ref.size(); ++i)
      worst = std::max(worst, std::fabs(fit.model.w_out.data()[i] -
                                        ref.data()[i]) /
                                  scale);
  }
  c.expect(worst <= 1e-8, "readout matches the naive solve within 1e-8 "
                          "relative (worst " +
                              std::to_string(worst) + ")");
}

// --------------------------------------------------------------------------
// 4 & 5. Irregularity sweeps.
// --------------------------------------------------------------------------
bench::SweepConfig sweep_base() {
  bench::SweepConfig cfg;
  cfg.n_units = 500;
  cfg.n_segments = 50;
  cfg.horizon = 200;
  cfg.primer_len = 100;
  cfg.n_steps = 10000;
  cfg.data_seed = 1;
  cfg.model_seed = 7;
  cfg.tune_segments = 8;
  cfg.divergence_cap = 2.0;
  cfg.washout = 100;
  cfg.tune_grid.alpha = {0.3, 0.6, 1.0};
  cfg.tune_grid.radius = {0.8, 1.0, 1.2};
  cfg.tune_grid.lambda = {1e-7, 1e-5, 1e-3};
  cfg.tune_grid.input_scaling = {0.5, 1.0};
  return cfg;
}

void criterion4(Checker& c) {
  bench::SweepConfig cfg = sweep_base();
  cfg.attractor = "lorenz";
  cfg.pi_values = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  const bench::SweepResult r = bench::irregularity_sweep(cfg, nullptr);

  std::map<double, const bench::SweepRow*> by_pi;
  for (const auto& row : r.rows) by_pi[row.pi] = &row;
  std::ostringstream medians;
  for (const auto& row : r.rows)
    medians << " pi=" << row.pi << " esn=" << row.esn.median
            << " taesn=" << row.taesn.median;
  c.note("medians:" + medians.str());

  const double esn0 = by_pi[0.0]->esn.median;
  const double ta0 = by_pi[0.0]->taesn.median;
  c.note("note: at a 0.01 base gap this pi grid means 100-600% relative gap "
         "spread; the adaptive update is affine in the gap, so its one-step "
         "error is quadratic in the spread and the 200-step loop amplifies "
         "it ~700x -- measured, both variants saturate the divergence cap "
         "from pi=0.01 on");
  c.expect(std::fabs(ta0 - esn0) < 0.05 * std::fabs(esn0),
           "regular-time medians within 5% of each other");
  for (double pi : {0.03, 0.04, 0.05})
    c.expect(by_pi[pi]->taesn.median < by_pi[pi]->esn.median,
             "adaptive median below regular at pi=" + std::to_string(pi));
  c.expect(by_pi[0.05]->taesn.median < 3.0 * ta0,
           "adaptive degradation at pi=0.05 stays under 3x its regular-time "
           "median");
  c.expect(by_pi[0.05]->esn.median > 5.0 * esn0,
           "regular model at pi=0.05 exceeds 5x its regular-time median");
}

void criterion5(Checker& c) {
  bench::SweepConfig cfg = sweep_base();
  cfg.attractor = "mackey_glass";
  cfg.pi_values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  const bench::SweepResult r = bench::irregularity_sweep(cfg, nullptr);

  std::ostringstream medians;
  for (const auto& row : r.rows)
    medians << " pi=" << row.pi << " esn=" << row.esn.median
            << " taesn=" << row.taesn.median;
  c.note("medians:" + medians.str());

  for (const auto& row : r.rows) {
    if (row.pi < 0.2 - 1e-12) continue;
    c.expect(row.taesn.median <= row.esn.median,
             "adaptive median <= regular at pi=" + std::to_string(row.pi));
  }
}

// --------------------------------------------------------------------------
// 6. Gesture classification bands and orderings.
// --------------------------------------------------------------------------
void criterion6(Checker& c) {
  bench::Table1Config cfg;
  cfg.seed = 42;
  std::string train = env_or("TARNN_UWAVE_TRAIN", "");
  std::string test = env_or("TARNN_UWAVE_TEST", "");
  if (train.empty() &&
      fs::exists("data/UWaveGestureLibraryAll_TRAIN.txt") &&
      fs::exists("data/UWaveGestureLibraryAll_TEST.txt")) {
    train = "data/UWaveGestureLibraryAll_TRAIN.txt";
    test = "data/UWaveGestureLibraryAll_TEST.txt";
  }
  const bool real_data = !train.empty();
  cfg.train_archive = train;
  cfg.test_archive = test;
  c.note(real_data ? "using archive files: " + train
                   : "using the synthetic gesture stand-in");

  cfg.esn_units = 500;
  cfg.esn_seeds = 10;
  cfg.esn_grid.alpha = {0.3, 0.6, 1.0};
  cfg.esn_grid.radius = {0.9, 1.1};
  cfg.esn_grid.lambda = {1e-6, 1e-4, 1e-2};
  cfg.esn_grid.input_scaling = {1.0};
  cfg.epochs = 100;
  const bool full = full_tier();
  cfg.gated_hidden = full ? 100 : 32;
  cfg.gated_seeds = full ? 10 : 5;
  c.note(full ? "gated rows at full scale (100 hidden, 10 seeds)"
              : "gated rows at the quick tier (32 hidden, 5 seeds)");

  const auto rows = bench::run_table1(cfg, nullptr);
  std::map<std::string, const bench::TableRow*> by_key;
  for (const auto& r : rows) by_key[r.model + "/" + r.transform] = &r;
  std::ostringstream summary;
  for (const auto& r : rows)
    summary << " " << r.model << "(" << r.transform
            << ")=" << r.accuracy.mean;
  c.note("mean accuracies:" + summary.str());

  const double taesn_exp = by_key["taesn/exp"]->accuracy.mean;
  const double taesn_lin = by_key["taesn/linear"]->accuracy.mean;
  const double gru = by_key["gru/-"]->accuracy.mean;
  const double grut = by_key["grut/linear"]->accuracy.mean;
  const double tagru_lin = by_key["tagru/linear"]->accuracy.mean;

  c.expect(taesn_exp >= 0.88,
           "exp-scaled adaptive reservoir mean accuracy >= 0.88 (got " +
               std::to_string(taesn_exp) + ")");
  c.expect(taesn_lin >= 0.87,
           "linearly-scaled adaptive reservoir mean accuracy >= 0.87 (got " +
               std::to_string(taesn_lin) + ")");
  c.expect(grut > gru, "gap-as-input gated model beats the plain one (" +
                           std::to_string(grut) + " vs " + std::to_string(gru) +
                           ")");
  if (full)
    c.expect(tagru_lin - gru >= 0.05,
             "adaptive gated model beats the plain one by >= 0.05 (" +
                 std::to_string(tagru_lin) + " vs " + std::to_string(gru) + ")");
  else
    c.expect(tagru_lin > gru,
             "adaptive gated model beats the plain one (" +
                 std::to_string(tagru_lin) + " vs " + std::to_string(gru) + ")");

  // criterion 8 consumes the parameter column of the same runs
  std::ofstream out("acceptance_table1.csv");
  bench::write_table1_csv(rows, "acceptance_table1.csv");
}

// --------------------------------------------------------------------------
// 7. Timestamped prediction table.
// --------------------------------------------------------------------------
void criterion7(Checker& c) {
  bench::Table2Config cfg;
  cfg.seed = 42;
  std::string csv = env_or("TARNN_CAVE_CSV", "");
  if (csv.empty() && fs::exists("data/speleothem.csv"))
    csv = "data/speleothem.csv";
  const bool real_data = !csv.empty();
  cfg.csv_path = csv;
  c.note(real_data ? "using timestamped series: " + csv
                   : "using the synthetic timestamped stand-in");

  cfg.esn_units = 50;
  cfg.gated_hidden = 30;
  cfg.seeds = 10;
  cfg.epochs = 100;
  cfg.esn_grid.alpha = {0.2, 0.4, 0.6, 0.8, 1.0};
  cfg.esn_grid.radius = {0.7, 0.9, 1.1};
  cfg.esn_grid.lambda = {1e-7, 1e-5, 1e-3};
  cfg.esn_grid.input_scaling = {0.5, 1.0};

  const auto rows = bench::run_table2(cfg, nullptr);
  bench::write_table2_csv(rows, "acceptance_table2.csv");

  std::map<std::string, const bench::TableRow*> by_key;
  for (const auto& r : rows)
    by_key[r.model + "/" + r.transform + "/" + r.validation] = &r;
  std::ostringstream summary;
  for (const auto& r : rows)
    summary << " " << r.model << "(" << r.transform << "," << r.validation
            << ")=" << r.test_rmse.mean;
  c.note("test RMSE means:" + summary.str());

  c.expect(rows.size() == 14, "all table rows emitted");
  bool finite = true;
  for (const auto& r : rows)
    finite = finite && std::isfinite(r.test_rmse.mean) &&
             std::isfinite(r.val_rmse.mean) && std::isfinite(r.test_mape.mean);
  c.expect(finite, "every row carries finite metrics");

  if (real_data) {
    const double ta = by_key["taesn/exp/cv"]->test_rmse.mean;
    const double esn = by_key["esn/-/cv"]->test_rmse.mean;
    c.expect(ta < esn, "cross-validated adaptive reservoir beats the regular "
                       "one on test RMSE (" +
                           std::to_string(ta) + " vs " + std::to_string(esn) +
                           ")");
    c.expect(by_key["taesn/exp/cv"]->test_mape.mean < 1.7,
             "cross-validated adaptive reservoir test MAPE < 1.7");
  }
}

// --------------------------------------------------------------------------
// 8. Parameter-count identities.
// --------------------------------------------------------------------------
void criterion8(Checker& c) {
  for (const std::size_t hidden : {10ul, 32ul, 100ul}) {
    GatedConfig base;
    base.n_hidden = hidden;
    base.n_in = 1;
    base.n_out = 8;
    RngStream r1(1), r2(1), r3(1);
    base.variant = GatedVariant::GRU;
    const GatedModel gru = init_gated(base, r1);
    base.variant = GatedVariant::TAGRU;
    const GatedModel tagru = init_gated(base, r2);
    base.variant = GatedVariant::GRUT;
    const GatedModel grut = init_gated(base, r3);
    c.expect(tagru.param_count() == gru.param_count(),
             "adaptive and plain gated models have equal parameter counts at "
             "hidden=" + std::to_string(hidden));
    c.expect(grut.param_count() - gru.param_count() == 3 * hidden,
             "gap-as-input variant adds exactly 3*hidden parameters at "
             "hidden=" + std::to_string(hidden));
  }
}

// --------------------------------------------------------------------------
// 9. Numerics identities.
// --------------------------------------------------------------------------
void criterion9(Checker& c) {
  // spectral rescaling round-trip
  double worst = 0.0;
  RngStream root(2025);
  for (int i = 0; i < 100; ++i) {
    RngStream rng = root.split(i);
    const std::size_t n = 10 + rng.next_below(40);
    const DenseMatrix m = random_uniform_matrix(n, n, 1.0, rng);
    const double target = 0.5 + 0.9 * rng.next_unit();
    const DenseMatrix scaled = scale_to_radius(m, target);
    worst = std::max(worst,
                     std::fabs(spectral_radius(scaled) - target) / target);
  }
  c.expect(worst <= 1e-9, "rescale round-trip within 1e-9 over 100 matrices "
                          "(worst " + std::to_string(worst) + ")");

  // integrator order on the chaotic system
  LorenzConfig warm;
  warm.n_steps = 3;
  warm.seed = 12;
  const SampledSeries starts = generate_lorenz(warm);
  bool order_ok = true;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::array<double, 3> s0 = {starts.values(k, 0), starts.values(k, 1),
                                       starts.values(k, 2)};
    auto end_state = [&](double dt, std::size_t steps) {
      LorenzConfig lc;
      lc.initial = s0;
      lc.transient = 0;
      lc.base_dt = dt;
      lc.n_steps = steps + 1;
      const SampledSeries s = generate_lorenz(lc);
      return std::array<double, 3>{s.values(steps, 0), s.values(steps, 1),
                                    s.values(steps, 2)};
    };
    const auto coarse = end_state(0.02, 1);
    const auto half = end_state(0.01, 2);
    const auto ref = end_state(0.0003125, 64);
    double e1 = 0.0, e2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      e1 = std::max(e1, std::fabs(coarse[j] - ref[j]));
      e2 = std::max(e2, std::fabs(half[j] - ref[j]));
    }
    const double ratio = e1 / e2;
    order_ok = order_ok && ratio >= 12.0 && ratio <= 20.0;
  }
  c.expect(order_ok, "step-halving error ratio lies in [12, 20]");

  // spline knot reproduction
  MackeyGlassConfig mc;
  mc.n_steps = 2000;
  mc.transient = 2000;
  const SampledSeries fine = generate_mackey_glass(mc);
  std::vector<double> q;
  for (std::size_t i = 50; i < 150; ++i) q.push_back(fine.timestamps[i]);
  const SampledSeries rs = cubic_spline_resample(fine, q);
  double knot_err = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    knot_err = std::max(knot_err,
                        std::fabs(rs.values(i, 0) - fine.values(50 + i, 0)));
  c.expect(knot_err <= 1e-12, "spline reproduces knots within 1e-12 (worst " +
                                  std::to_string(knot_err) + ")");

  // nonlinear gap-scaling identities
  const TimeTransform ex{TimeScale::Exp, 1.0};
  c.expect(ex.apply(0.0) == 0.0, "exp scaling maps 0 to exactly 0");
  c.expect(std::fabs(ex.apply(0.693147180559945309417232121458) - 0.5) <=
               1e-15,
           "exp scaling maps ln 2 to 0.5 within 1e-15");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc + 1; ++i) {
    if (i < argc && std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[i + 1]);
  }

  const std::map<int, std::pair<const char*, std::function<void(Checker&)>>>
      criteria{
          {1, {"regular-time fallback equivalence", criterion1}},
          {2, {"BPTT gradients vs finite differences", criterion2}},
          {3, {"ridge readout vs naive normal equations", criterion3}},
          {4, {"chaotic sweep ordering (3-dim attractor)", criterion4}},
          {5, {"chaotic sweep ordering (delay attractor)", criterion5}},
          {6, {"gesture classification bands", criterion6}},
          {7, {"timestamped prediction table", criterion7}},
          {8, {"parameter-count identities", criterion8}},
          {9, {"numerics identities", criterion9}},
      };

  int failures = 0;
  for (const auto& [num, entry] : criteria) {
    if (only != 0 && num != only) continue;
    Checker c{num};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entry.second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %d: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL",
                num, entry.first, secs);
    for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
    if (!c.ok) ++failures;
  }
  return failures;
}
