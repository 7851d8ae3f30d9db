#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "tarnn/gated.hpp"
#include "tarnn/numerics.hpp"

using namespace tarnn;

namespace {

GatedConfig small_cfg(GatedVariant v, std::size_t hidden = 8,
                      std::size_t n_in = 2, std::size_t n_out = 3) {
  GatedConfig c;
  c.variant = v;
  c.n_hidden = hidden;
  c.n_in = n_in;
  c.n_out = n_out;
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

// Loss conventions mirror the trainer: cross-entropy reads the last step,
// MSE averages over every step and output.
double loss_of(const GatedModel& m, const SampledSeries& s, GatedLoss loss) {
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
    const double logz = mx + std::log(z);
    return logz - res.outputs(len - 1, static_cast<std::size_t>(*s.label));
  }
  double acc = 0.0;
  for (std::size_t n = 0; n < len; ++n)
    for (std::size_t o = 0; o < no; ++o) {
      const double e = res.outputs(n, o) - (*s.targets)(n, o);
      acc += e * e;
    }
  return acc / static_cast<double>(len * no);
}

DenseMatrix loss_grads(const GatedModel& m, const ForwardResult& res,
                       const SampledSeries& s, GatedLoss loss) {
  const std::size_t len = s.length();
  const std::size_t no = m.cfg.n_out;
  DenseMatrix dy(len, no);
  if (loss == GatedLoss::CrossEntropy) {
    double mx = res.outputs(len - 1, 0);
    for (std::size_t o = 1; o < no; ++o)
      mx = std::max(mx, res.outputs(len - 1, o));
    double z = 0.0;
    for (std::size_t o = 0; o < no; ++o)
      z += std::exp(res.outputs(len - 1, o) - mx);
    const double logz = mx + std::log(z);
    for (std::size_t o = 0; o < no; ++o) {
      const double p = std::exp(res.outputs(len - 1, o) - logz);
      dy(len - 1, o) =
          p - (static_cast<int>(o) == *s.label ? 1.0 : 0.0);
    }
    return dy;
  }
  const double denom = static_cast<double>(len * no);
  for (std::size_t n = 0; n < len; ++n)
    for (std::size_t o = 0; o < no; ++o)
      dy(n, o) = 2.0 * (res.outputs(n, o) - (*s.targets)(n, o)) / denom;
  return dy;
}

struct NamedMat {
  const char* name;
  DenseMatrix GatedModel::* member;
  DenseMatrix GatedGrads::* gmember;
};

const NamedMat kMats[] = {
    {"w_z", &GatedModel::w_z, &GatedGrads::w_z},
    {"u_z", &GatedModel::u_z, &GatedGrads::u_z},
    {"w_r", &GatedModel::w_r, &GatedGrads::w_r},
    {"u_r", &GatedModel::u_r, &GatedGrads::u_r},
    {"w_h", &GatedModel::w_h, &GatedGrads::w_h},
    {"u_h", &GatedModel::u_h, &GatedGrads::u_h},
    {"w_out", &GatedModel::w_out, &GatedGrads::w_out},
};

// Central finite differences against the analytic BPTT gradient.
void check_gradients(const GatedModel& model, const SampledSeries& s,
                     GatedLoss loss, double eps, double tol) {
  const ForwardResult res = forward(model, s);
  const GatedGrads grads =
      backward(model, res.cache, loss_grads(model, res, s, loss));

  for (const auto& nm : kMats) {
    const DenseMatrix& analytic = grads.*(nm.gmember);
    GatedModel probe = model;
    DenseMatrix& target = probe.*(nm.member);
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double keep = target.data()[i];
      target.data()[i] = keep + eps;
      const double up = loss_of(probe, s, loss);
      target.data()[i] = keep - eps;
      const double dn = loss_of(probe, s, loss);
      target.data()[i] = keep;
      const double fd = (up - dn) / (2.0 * eps);
      const double got = analytic.data()[i];
      const double scale = std::max({1e-6, std::fabs(fd), std::fabs(got)});
      INFO(nm.name, "[", i, "] fd=", fd, " analytic=", got);
      CHECK(std::fabs(fd - got) <= tol * scale);
    }
  }
}

}  // namespace

TEST_SUITE("gated") {

TEST_CASE("parameter-count identities") {
  RngStream rng(1);
  const std::size_t H = 100;
  const GatedModel gru = init_gated(small_cfg(GatedVariant::GRU, H, 1, 8), rng);
  RngStream rng2(1);
  const GatedModel grut = init_gated(small_cfg(GatedVariant::GRUT, H, 1, 8), rng2);
  RngStream rng3(1);
  const GatedModel tagru =
      init_gated(small_cfg(GatedVariant::TAGRU, H, 1, 8), rng3);

  CHECK(tagru.param_count() == gru.param_count());
  CHECK(grut.param_count() - gru.param_count() == 3 * H);
}

TEST_CASE("step edge cases") {
  RngStream rng(2);
  const GatedModel m = init_gated(small_cfg(GatedVariant::TAGRU), rng);
  Vector h(8);
  for (std::size_t i = 0; i < 8; ++i) h[i] = 0.1 * static_cast<double>(i) - 0.3;
  const Vector x{0.4, -0.7};

  SUBCASE("dt = 0 freezes the state exactly") {
    const Vector h2 = gated_step(m, h, x, 0.0);
    CHECK(h2 == h);
  }
  SUBCASE("dt beyond one is rejected for the adaptive variant") {
    CHECK_THROWS_AS((void)gated_step(m, h, x, 1.5), std::invalid_argument);
  }
  SUBCASE("zero weights give the half-mix update") {
    GatedModel z = m;
    for (DenseMatrix* w : {&z.w_z, &z.u_z, &z.w_r, &z.u_r, &z.w_h, &z.u_h})
      w->fill(0.0);
    GateRecord rec;
    const Vector h2 = gated_step(z, h, x, 1.0, &rec);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(rec.z[i] == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(rec.r[i] == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(rec.candidate[i] == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(h2[i] == doctest::Approx(0.5 * h[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("adaptive variant with unit steps reproduces the regular network") {
  RngStream root(7);
  for (int seed = 0; seed < 3; ++seed) {
    RngStream ra(200 + seed), rb(200 + seed), sr = root.split(seed);
    const GatedModel gru = init_gated(small_cfg(GatedVariant::GRU), ra);
    GatedConfig ct = small_cfg(GatedVariant::TAGRU);
    const GatedModel tagru = init_gated(ct, rb);
    SampledSeries s = random_series(25, 2, sr, /*regular=*/true);
    // linear transform fitted on the constant gaps: dt_eff == 1
    GatedModel tg = tagru;
    tg.cfg.transform = fit_transform(TimeScale::Linear, s.deltas());

    const ForwardResult fa = forward(gru, s);
    const ForwardResult fb = forward(tg, s);
    for (std::size_t i = 0; i < fa.outputs.size(); ++i)
      CHECK(std::fabs(fa.outputs.data()[i] - fb.outputs.data()[i]) <= 1e-12);

    // gradients agree too
    s.label = 1;
    const DenseMatrix da = loss_grads(gru, fa, s, GatedLoss::CrossEntropy);
    const GatedGrads ga = backward(gru, fa.cache, da);
    const DenseMatrix db = loss_grads(tg, fb, s, GatedLoss::CrossEntropy);
    const GatedGrads gb = backward(tg, fb.cache, db);
    for (const auto& nm : kMats) {
      const DenseMatrix& ma = ga.*(nm.gmember);
      const DenseMatrix& mb = gb.*(nm.gmember);
      for (std::size_t i = 0; i < ma.size(); ++i)
        CHECK(std::fabs(ma.data()[i] - mb.data()[i]) <= 1e-10);
    }
  }
}

TEST_CASE("forward shapes and trivial outputs") {
  RngStream rng(11);
  GatedModel m = init_gated(small_cfg(GatedVariant::GRU), rng);

  SUBCASE("zero readout weights give zero outputs") {
    m.w_out.fill(0.0);
    RngStream sr(12);
    const SampledSeries s = random_series(9, 2, sr);
    const ForwardResult res = forward(m, s);
    CHECK(max_abs(res.outputs) == 0.0);
  }
  SUBCASE("length-1 sequence produces one output row") {
    RngStream sr(13);
    const SampledSeries s = random_series(1, 2, sr);
    const ForwardResult res = forward(m, s);
    CHECK(res.outputs.rows() == 1);
    CHECK(all_finite(res.outputs));
  }
}

TEST_CASE("zero output gradient yields zero parameter gradients") {
  RngStream rng(21), sr(22);
  const GatedModel m = init_gated(small_cfg(GatedVariant::TAGRU), rng);
  const SampledSeries s = random_series(12, 2, sr);
  const ForwardResult res = forward(m, s);
  const GatedGrads g = backward(m, res.cache, DenseMatrix(12, 3));
  CHECK(g.global_norm() == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  // 8-unit models over 20-step irregular sequences; both losses
  RngStream root(31);
  for (int seed = 0; seed < 2; ++seed) {
    for (const GatedVariant v :
         {GatedVariant::GRU, GatedVariant::GRUT, GatedVariant::TAGRU}) {
      RngStream mr(500 + seed * 10 + static_cast<int>(v));
      GatedConfig c = small_cfg(v);
      c.transform = TimeTransform{TimeScale::Linear, 1.2};
      const GatedModel m = init_gated(c, mr);
      RngStream sr = root.split(seed * 10 + static_cast<int>(v));
      SampledSeries s = random_series(20, 2, sr);

      s.label = seed % 3;
      check_gradients(m, s, GatedLoss::CrossEntropy, 1e-5, 1e-4);

      DenseMatrix targets(20, 3);
      for (std::size_t i = 0; i < targets.size(); ++i)
        targets.data()[i] = sr.uniform(-1, 1);
      s.targets = targets;
      check_gradients(m, s, GatedLoss::MeanSquaredError, 1e-5, 1e-4);
    }
  }
}

TEST_CASE("state boundedness") {
  RngStream rng(41), sr(42);
  GatedConfig c = small_cfg(GatedVariant::TAGRU);
  c.transform = TimeTransform{TimeScale::Exp, 1.0};
  GatedModel m = init_gated(c, rng);
  m.u_h *= 10.0;  // exaggerate the drive; the mix bound must still hold
  m.w_h *= 10.0;
  const SampledSeries s = random_series(200, 2, sr);
  const ForwardResult res = forward(m, s);
  for (const auto& h : res.cache.h) CHECK(max_abs(h) <= 1.0 + 1e-12);
}

TEST_CASE("training behaviour") {
  // two-class toy problem: class decided by the sign of the mean input
  RngStream data_rng(51);
  auto make_item = [&](int cls) {
    SampledSeries s = random_series(15, 1, data_rng);
    for (std::size_t i = 0; i < 15; ++i)
      s.values(i, 0) = (cls == 0 ? 0.7 : -0.7) + 0.2 * s.values(i, 0);
    s.label = cls;
    return s;
  };
  std::vector<SampledSeries> tr_items, val_items;
  for (int i = 0; i < 24; ++i) tr_items.push_back(make_item(i % 2));
  for (int i = 0; i < 8; ++i) val_items.push_back(make_item(i % 2));

  GatedConfig c = small_cfg(GatedVariant::TAGRU, 16, 1, 2);
  c.transform = TimeTransform{TimeScale::Linear, 1.0};

  SUBCASE("zero learning rate leaves parameters untouched") {
    RngStream mr(52);
    const GatedModel m = init_gated(c, mr);
    TrainConfig tc;
    tc.epochs = 3;
    tc.learning_rate = 0.0;
    tc.seed = 1;
    const TrainResult res = train(m, tr_items, val_items, tc);
    CHECK(res.model.w_z == m.w_z);
    CHECK(res.model.u_h == m.u_h);
    CHECK(res.model.w_out == m.w_out);
    CHECK(res.history.size() == 3);
  }

  SUBCASE("separable toy set reaches full training accuracy") {
    RngStream mr(53);
    const GatedModel m = init_gated(c, mr);
    TrainConfig tc;
    tc.epochs = 100;
    tc.batch_size = 8;
    tc.learning_rate = 1e-2;
    tc.seed = 2;
    const TrainResult res = train(m, tr_items, val_items, tc);
    CHECK(classification_accuracy(res.model, tr_items) == 1.0);
    CHECK(res.best_epoch < 100);
    // history records the best snapshot's loss
    double best = res.history[0].val_loss;
    for (const auto& e : res.history) best = std::min(best, e.val_loss);
    CHECK(res.history[res.best_epoch].val_loss == best);
  }

  SUBCASE("training is reproducible per seed") {
    RngStream m1(54), m2(54);
    TrainConfig tc;
    tc.epochs = 5;
    tc.learning_rate = 1e-2;
    tc.seed = 9;
    const TrainResult a = train(init_gated(c, m1), tr_items, val_items, tc);
    const TrainResult b = train(init_gated(c, m2), tr_items, val_items, tc);
    CHECK(a.model.w_z == b.model.w_z);
    CHECK(a.model.w_out == b.model.w_out);
  }

  SUBCASE("batched evaluation matches per-item classification") {
    RngStream mr(55);
    const GatedModel m = init_gated(c, mr);
    std::size_t correct = 0;
    for (const auto& item : tr_items)
      if (classify(m, item) == *item.label) ++correct;
    const double acc = classification_accuracy(m, tr_items);
    CHECK(acc == doctest::Approx(static_cast<double>(correct) /
                                 static_cast<double>(tr_items.size())));
  }

  SUBCASE("divergent training is reported") {
    // squared error overflows once the readout weights blow up
    RngStream sr2(57), mr(56);
    SampledSeries seq = random_series(30, 1, sr2);
    DenseMatrix tgt(30, 1);
    for (std::size_t i = 0; i < 30; ++i) tgt(i, 0) = seq.values(i, 0);
    seq.targets = tgt;
    const std::vector<SampledSeries> one{seq};
    GatedConfig rc = small_cfg(GatedVariant::GRU, 4, 1, 1);
    const GatedModel m = init_gated(rc, mr);
    TrainConfig tc;
    tc.loss = GatedLoss::MeanSquaredError;
    tc.epochs = 400;
    tc.learning_rate = 1e160;
    tc.grad_clip = 1e300;
    tc.seed = 3;
    CHECK_THROWS_AS((void)train(m, one, one, tc), std::runtime_error);
  }
}

TEST_CASE("regression training on one long sequence") {
  // target: smoothed copy of the input, learnable by a small model
  RngStream sr(61);
  SampledSeries s = random_series(120, 1, sr);
  DenseMatrix tgt(120, 1);
  double smooth = 0.0;
  for (std::size_t i = 0; i < 120; ++i) {
    smooth = 0.7 * smooth + 0.3 * s.values(i, 0);
    tgt(i, 0) = smooth;
  }
  s.targets = tgt;

  GatedConfig c = small_cfg(GatedVariant::GRU, 12, 1, 1);
  RngStream mr(62);
  const GatedModel m = init_gated(c, mr);
  TrainConfig tc;
  tc.loss = GatedLoss::MeanSquaredError;
  tc.epochs = 60;
  tc.batch_size = 1;
  tc.learning_rate = 1e-2;
  tc.seed = 4;
  tc.val_tail = 30;
  const std::vector<SampledSeries> tr{s}, va{s};
  const TrainResult res = train(m, tr, va, tc);
  const double before = evaluate_loss(m, tr, GatedLoss::MeanSquaredError);
  const double after = evaluate_loss(res.model, tr, GatedLoss::MeanSquaredError);
  CHECK(after < 0.5 * before);
}

TEST_CASE("generative continuation is deterministic and aligned") {
  RngStream sr(71), mr(72);
  SampledSeries s = random_series(40, 1, sr);
  DenseMatrix tgt(40, 1);
  for (std::size_t i = 0; i < 40; ++i) tgt(i, 0) = s.values(i, 0);
  s.targets = tgt;
  GatedConfig c = small_cfg(GatedVariant::TAGRU, 6, 1, 1);
  c.transform = TimeTransform{TimeScale::Exp, 1.0};
  const GatedModel m = init_gated(c, mr);

  const std::vector<double> deltas(10, 0.4);
  const SampledSeries a = run_generative(m, s, deltas);
  const SampledSeries b = run_generative(m, s, deltas);
  CHECK(a.values == b.values);
  CHECK(a.length() == 10);
  CHECK(a.timestamps.front() == doctest::Approx(s.timestamps.back() + 0.4));
}

}  // TEST_SUITE
