#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "tarnn/datagen.hpp"
#include "tarnn/numerics.hpp"
#include "tarnn/reservoir.hpp"

using namespace tarnn;

namespace {

ReservoirConfig small_cfg(ReservoirVariant v, std::size_t units = 20) {
  ReservoirConfig c;
  c.variant = v;
  c.n_units = units;
  c.n_in = 2;
  c.n_out = 2;
  c.alpha = 0.8;
  c.radius = 0.9;
  c.input_scaling = 0.5;
  c.transform = TimeTransform{TimeScale::Linear, 1.0};
  return c;
}

SampledSeries random_series(std::size_t len, std::size_t dims, RngStream& rng,
                            bool regular = false) {
  SampledSeries s;
  s.timestamps.resize(len);
  s.values = DenseMatrix(len, dims);
  double t = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    t += regular ? 1.0 : rng.uniform(0.2, 1.0);
    s.timestamps[i] = t;
    for (std::size_t j = 0; j < dims; ++j) s.values(i, j) = rng.uniform(-1, 1);
  }
  return s;
}

}  // namespace

TEST_SUITE("reservoir") {

TEST_CASE("init is deterministic and hits the target radius") {
  ReservoirConfig c = small_cfg(ReservoirVariant::ESN, 50);
  RngStream r1(9), r2(9);
  const ReservoirModel a = init_reservoir(c, r1);
  const ReservoirModel b = init_reservoir(c, r2);
  CHECK(a.w_in == b.w_in);
  CHECK(a.u == b.u);
  CHECK(std::fabs(spectral_radius(a.u) - c.radius) <= 1e-9);

  c.input_scaling = 0.0;
  RngStream r3(9);
  const ReservoirModel z = init_reservoir(c, r3);
  CHECK(max_abs(z.w_in) == 0.0);
}

TEST_CASE("500-unit reservoir measures its configured radius") {
  ReservoirConfig c = small_cfg(ReservoirVariant::ESN, 500);
  c.n_in = 3;
  c.radius = 1.1;
  RngStream rng(17);
  const ReservoirModel m = init_reservoir(c, rng);
  CHECK(m.u.rows() == 500);
  CHECK(std::fabs(spectral_radius(m.u) - 1.1) <= 1e-9);
}

TEST_CASE("step edge cases") {
  RngStream rng(3);
  const ReservoirModel m = init_reservoir(small_cfg(ReservoirVariant::TAESN), rng);
  const Vector h(20, 0.25);
  const Vector x{0.5, -0.5};

  SUBCASE("dt = 0 freezes the state exactly") {
    const Vector h2 = step(m, h, x, 0.0);
    CHECK(h2 == h);
  }
  SUBCASE("alpha*dt beyond one is rejected") {
    ReservoirConfig c = small_cfg(ReservoirVariant::TAESN);
    c.alpha = 1.0;
    RngStream r(3);
    const ReservoirModel m1 = init_reservoir(c, r);
    CHECK_THROWS_AS((void)step(m1, h, x, 1.5), std::invalid_argument);
  }
  SUBCASE("pure feedforward step from zero state") {
    ReservoirConfig c = small_cfg(ReservoirVariant::TAESN);
    c.alpha = 1.0;
    RngStream r(5);
    const ReservoirModel m1 = init_reservoir(c, r);
    const Vector zero(20, 0.0);
    const Vector got = step(m1, zero, x, 1.0);
    Vector aug{1.0, x[0], x[1]};
    const Vector drive = matvec(m1.w_in, aug);
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(std::tanh(drive[i])).epsilon(1e-15));
  }
}

TEST_CASE("adaptive variant with unit steps reproduces the regular update") {
  // constant gaps + linear transform fitted on them: dt_eff == 1 exactly
  RngStream root(31);
  for (int seed = 0; seed < 3; ++seed) {
    RngStream rng = root.split(seed);
    SampledSeries s = random_series(60, 2, rng, /*regular=*/true);

    ReservoirConfig ce = small_cfg(ReservoirVariant::ESN);
    ReservoirConfig ct = small_cfg(ReservoirVariant::TAESN);
    ct.transform = fit_transform(TimeScale::Linear, s.deltas());
    RngStream ra(100 + seed), rb(100 + seed);
    const ReservoirModel esn = init_reservoir(ce, ra);
    const ReservoirModel taesn = init_reservoir(ct, rb);

    const StateTrajectory te = run_teacher_forced(esn, s);
    const StateTrajectory tt = run_teacher_forced(taesn, s);
    for (std::size_t i = 0; i < te.states.size(); ++i)
      CHECK(std::fabs(te.states.data()[i] - tt.states.data()[i]) <= 1e-12);
  }
}

TEST_CASE("teacher forcing: single-sample series keeps the zero state") {
  RngStream rng(8);
  const ReservoirModel m = init_reservoir(small_cfg(ReservoirVariant::ESN), rng);
  SampledSeries s;
  s.timestamps = {0.0};
  s.values = DenseMatrix(1, 2, 0.7);
  const StateTrajectory t = run_teacher_forced(m, s);
  CHECK(t.states.rows() == 1);
  CHECK(max_abs(t.states) == 0.0);
}

TEST_CASE("constant drive converges to a fixed point") {
  RngStream rng(12);
  ReservoirConfig c = small_cfg(ReservoirVariant::ESN, 30);
  c.radius = 0.8;
  const ReservoirModel m = init_reservoir(c, rng);
  const Vector x{0.3, -0.2};
  Vector h(30, 0.0), prev;
  double diff = 1.0;
  for (int i = 0; i < 5000 && diff >= 1e-10; ++i) {
    prev = h;
    h = step(m, h, x, 1.0);
    diff = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j)
      diff = std::max(diff, std::fabs(h[j] - prev[j]));
  }
  CHECK(diff < 1e-10);
}

TEST_CASE("states stay in the convex-combination bound") {
  RngStream rng(14);
  ReservoirConfig c = small_cfg(ReservoirVariant::TAESN);
  c.radius = 1.2;  // even an expanding reservoir obeys the mix bound
  c.transform = TimeTransform{TimeScale::Exp, 1.0};
  const ReservoirModel m = init_reservoir(c, rng);
  SampledSeries s = random_series(300, 2, rng);
  const StateTrajectory t = run_teacher_forced(m, s);
  double bound = 0.0;  // max(|h_0|, 1)
  for (std::size_t i = 0; i < t.states.rows(); ++i) {
    double row_max = 0.0;
    for (double v : t.states.row(i)) row_max = std::max(row_max, std::fabs(v));
    CHECK(row_max <= std::max(bound, 1.0) + 1e-12);
    bound = std::max(bound, row_max);
  }
}

TEST_CASE("long chaotic drive stays bounded") {
  LorenzConfig lc;
  lc.n_steps = 10000;
  lc.seed = 5;
  const SampledSeries lorenz = generate_lorenz(lc);
  const Normalizer nm = fit_normalizer(lorenz, 0, lorenz.length());
  const SampledSeries s = apply_normalizer(nm, lorenz);

  ReservoirConfig c = small_cfg(ReservoirVariant::ESN, 50);
  c.n_in = 3;
  c.n_out = 3;
  RngStream rng(21);
  const ReservoirModel m = init_reservoir(c, rng);
  const StateTrajectory t = run_teacher_forced(m, s);
  CHECK(all_finite(t.states));
  CHECK(max_abs(t.states) < 1.5);
}

TEST_CASE("readout training") {
  RngStream rng(33);
  const ReservoirModel m = init_reservoir(small_cfg(ReservoirVariant::ESN), rng);
  SampledSeries s = random_series(200, 2, rng);

  SUBCASE("zero targets give a zero readout") {
    const DenseMatrix targets(200, 2);
    const ReadoutFit fit = train_readout(m, s, targets, 1e-4, 10);
    CHECK(max_abs(fit.model.w_out) <= 1e-12);
    CHECK(fit.train_rmse <= 1e-12);
  }

  SUBCASE("a planted linear readout is recovered") {
    RngStream pr(44);
    const DenseMatrix planted = random_uniform_matrix(2, m.n_features(), 1.0, pr);
    const StateTrajectory traj = run_teacher_forced(m, s);
    DenseMatrix targets(200, 2);
    for (std::size_t n = 0; n < 200; ++n) {
      Vector feat(m.n_features());
      feat[0] = 1.0;
      feat[1] = s.values(n, 0);
      feat[2] = s.values(n, 1);
      for (std::size_t i = 0; i < 20; ++i) feat[3 + i] = traj.states(n, i);
      const Vector y = matvec(planted, feat);
      targets(n, 0) = y[0];
      targets(n, 1) = y[1];
    }
    const ReadoutFit fit = train_readout(m, s, targets, 0.0, 10);
    for (std::size_t i = 0; i < planted.size(); ++i)
      CHECK(std::fabs(fit.model.w_out.data()[i] - planted.data()[i]) <= 1e-8);
  }

  SUBCASE("washout must leave samples") {
    const DenseMatrix targets(200, 2);
    CHECK_THROWS_AS((void)train_readout(m, s, targets, 1e-4, 200),
                    std::invalid_argument);
  }
}

TEST_CASE("generative mode") {
  RngStream rng(55);
  const ReservoirModel base = init_reservoir(small_cfg(ReservoirVariant::ESN), rng);
  SampledSeries s = random_series(150, 2, rng);
  RngStream tr(56);
  const DenseMatrix targets = random_uniform_matrix(150, 2, 1.0, tr);
  const ReservoirModel m = train_readout(base, s, targets, 1e-6, 10).model;

  SUBCASE("untrained model refuses to run") {
    CHECK_THROWS_AS((void)run_generative(base, s, std::vector<double>{1.0}),
                    std::logic_error);
  }
  SUBCASE("zero horizon gives an empty prediction") {
    const SampledSeries out = run_generative(m, s, std::vector<double>{});
    CHECK(out.length() == 0);
  }
  SUBCASE("identical primers and gaps give identical predictions") {
    const std::vector<double> deltas(20, 0.5);
    const SampledSeries a = run_generative(m, s, deltas);
    const SampledSeries b = run_generative(m, s, deltas);
    CHECK(a.values == b.values);
    CHECK(a.timestamps == b.timestamps);
    CHECK(a.length() == 20);
    CHECK(a.timestamps.front() ==
          doctest::Approx(s.timestamps.back() + 0.5));
  }
}

TEST_CASE("classification pieces") {
  RngStream rng(61);
  ReservoirConfig c = small_cfg(ReservoirVariant::TAESN);
  c.n_in = 1;
  c.transform = TimeTransform{TimeScale::Linear, 3.0};
  const ReservoirModel base = init_reservoir(c, rng);

  // two easily separated families of short sequences
  RngStream ir(62);
  auto make_item = [&](int cls) {
    SampledSeries s = random_series(30, 1, ir);
    for (std::size_t i = 0; i < 30; ++i)
      s.values(i, 0) = cls == 0 ? 0.8 + 0.1 * s.values(i, 0)
                                : -0.8 + 0.1 * s.values(i, 0);
    s.label = cls;
    return s;
  };
  std::vector<SampledSeries> train;
  for (int i = 0; i < 20; ++i) train.push_back(make_item(i % 2));

  const ReservoirModel clf = train_classifier(base, train, 2, 1e-6, 5);
  SUBCASE("training data is classified correctly") {
    for (const auto& item : train) CHECK(classify(clf, item, 5) == *item.label);
  }

  SUBCASE("single-class training predicts that class") {
    std::vector<SampledSeries> ones;
    for (int i = 0; i < 8; ++i) ones.push_back(make_item(1));
    const ReservoirModel one_clf = train_classifier(base, ones, 2, 1e-6, 5);
    for (const auto& item : ones) CHECK(classify(one_clf, item, 5) == 1);
  }

  SUBCASE("score vector length follows the class count") {
    std::vector<SampledSeries> eight;
    for (int i = 0; i < 16; ++i) {
      auto item = make_item(i % 2);
      item.label = i % 8;
      eight.push_back(item);
    }
    const ReservoirModel clf8 = train_classifier(base, eight, 8, 1e-6, 5);
    CHECK(classify_scores(clf8, eight[0], 5).size() == 8);
  }

  SUBCASE("mean-pooled readout equals the mean of per-step readouts") {
    const SampledSeries item = make_item(0);
    const Vector scores = classify_scores(clf, item, 5);
    const StateTrajectory traj = run_teacher_forced(clf, item);
    Vector mean(2, 0.0);
    std::size_t count = 0;
    for (std::size_t n = 5; n < item.length(); ++n) {
      Vector feat(clf.n_features());
      feat[0] = 1.0;
      feat[1] = item.values(n, 0);
      for (std::size_t i = 0; i < clf.cfg.n_units; ++i)
        feat[2 + i] = traj.states(n, i);
      const Vector y = matvec(clf.w_out, feat);
      for (std::size_t o = 0; o < 2; ++o) mean[o] += y[o];
      ++count;
    }
    for (std::size_t o = 0; o < 2; ++o) {
      mean[o] /= static_cast<double>(count);
      CHECK(scores[o] == doctest::Approx(mean[o]).epsilon(1e-10));
    }
  }

  SUBCASE("batched features match the per-sequence path") {
    // summation order differs between the blocked and per-row kernels
    const DenseMatrix batch = pooled_features_batch(clf, train, 5);
    for (std::size_t si = 0; si < train.size(); ++si) {
      const Vector single = pooled_features(clf, train[si], 5);
      for (std::size_t i = 0; i < single.size(); ++i)
        CHECK(std::fabs(batch(i, si) - single[i]) <= 1e-12);
    }
  }
}

TEST_CASE("echo state property washes out the initial state") {
  LorenzConfig lc;
  lc.n_steps = 1001;
  lc.seed = 77;
  const SampledSeries lorenz = generate_lorenz(lc);
  const Normalizer nm = fit_normalizer(lorenz, 0, lorenz.length());
  const SampledSeries s = apply_normalizer(nm, lorenz);

  ReservoirConfig c = small_cfg(ReservoirVariant::ESN, 40);
  c.n_in = 3;
  c.radius = 0.95;
  RngStream rng(78);
  const ReservoirModel m = init_reservoir(c, rng);

  RngStream hr(79);
  Vector h1(40, 0.0), h2(40);
  for (double& v : h2) v = hr.uniform(-1, 1);
  for (std::size_t n = 1; n < s.length(); ++n) {
    h1 = step(m, h1, s.values.row(n), 1.0);
    h2 = step(m, h2, s.values.row(n), 1.0);
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i)
    diff = std::max(diff, std::fabs(h1[i] - h2[i]));
  CHECK(diff < 1e-8);
}

}  // TEST_SUITE
