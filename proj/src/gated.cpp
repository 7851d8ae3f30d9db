#include "tarnn/gated.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "tarnn/kernels.hpp"
#include "tarnn/numerics.hpp"

namespace tarnn {
namespace {

constexpr double kDtSlack = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Effective step sizes for one series. mix is what scales the update gate
// (TAGRU), feat is what GRUT sees as its extra input column. The first
// observation has no preceding gap; it gets a full unit step.
void step_sizes(const GatedModel& m, const SampledSeries& s, Vector& mix,
                Vector& feat) {
  const std::size_t len = s.length();
  mix.assign(len, 1.0);
  feat.assign(len, 1.0);
  if (m.cfg.variant == GatedVariant::GRU || len < 2) return;
  const auto deltas = s.deltas();
  for (std::size_t n = 1; n < len; ++n) {
    const double tr = m.cfg.transform.apply(deltas[n - 1]);
    mix[n] = tr;
    feat[n] = m.cfg.raw_dt_input ? deltas[n - 1] : tr;
  }
  if (m.cfg.raw_dt_input) feat[0] = deltas[0];
}

struct Scratch {
  DenseMatrix az, ar, ac, rh;
};

// One batched update; h is [B x H] and is advanced in place. All GEMMs are
// *_nt against the row-major weight matrices.
void step_batch(const GatedModel& m, const DenseMatrix& x, DenseMatrix& h,
                std::span<const double> mix_dt, Scratch& s, DenseMatrix* z_out,
                DenseMatrix* r_out, DenseMatrix* c_out) {
  const std::size_t bsz = h.rows();
  const std::size_t nh = m.cfg.n_hidden;
  const std::size_t na = x.cols();
  const auto& K = kern::active();

  s.az.fill(0.0);
  s.ar.fill(0.0);
  s.ac.fill(0.0);
  K.gemm_nt(x.data(), na, m.w_z.data(), na, s.az.data(), nh, bsz, na, nh);
  K.gemm_nt(h.data(), nh, m.u_z.data(), nh, s.az.data(), nh, bsz, nh, nh);
  K.gemm_nt(x.data(), na, m.w_r.data(), na, s.ar.data(), nh, bsz, na, nh);
  K.gemm_nt(h.data(), nh, m.u_r.data(), nh, s.ar.data(), nh, bsz, nh, nh);
  for (std::size_t p = 0; p < s.az.size(); ++p)
    s.az.data()[p] = sigmoid(s.az.data()[p]);
  for (std::size_t p = 0; p < s.ar.size(); ++p)
    s.ar.data()[p] = sigmoid(s.ar.data()[p]);

  for (std::size_t p = 0; p < s.rh.size(); ++p)
    s.rh.data()[p] = s.ar.data()[p] * h.data()[p];
  K.gemm_nt(x.data(), na, m.w_h.data(), na, s.ac.data(), nh, bsz, na, nh);
  K.gemm_nt(s.rh.data(), nh, m.u_h.data(), nh, s.ac.data(), nh, bsz, nh, nh);
  for (std::size_t p = 0; p < s.ac.size(); ++p)
    s.ac.data()[p] = std::tanh(s.ac.data()[p]);

  for (std::size_t b = 0; b < bsz; ++b) {
    double dt = 1.0;
    if (m.cfg.variant == GatedVariant::TAGRU) {
      dt = mix_dt[b];
      if (dt > 1.0 + kDtSlack)
        throw std::invalid_argument("gated step: dt exceeds 1");
    }
    K.gate_mix(nh, dt, &s.az(b, 0), &s.ac(b, 0), &h(b, 0));
  }

  if (z_out) *z_out = s.az;
  if (r_out) *r_out = s.ar;
  if (c_out) *c_out = s.ac;
}

ForwardCache forward_batch(const GatedModel& m,
                           std::span<const SampledSeries* const> batch) {
  const std::size_t bsz = batch.size();
  if (bsz == 0) throw std::invalid_argument("forward: empty batch");
  const std::size_t len = batch[0]->length();
  for (const auto* s : batch) {
    if (s->length() != len)
      throw std::invalid_argument("forward: unequal sequence lengths in batch");
    if (s->dims() != m.cfg.n_in)
      throw std::invalid_argument("forward: input dim mismatch");
  }
  const std::size_t nh = m.cfg.n_hidden;
  const std::size_t na = 1 + m.n_in_eff();

  ForwardCache cache;
  cache.batch = bsz;
  cache.len = len;
  cache.h.resize(len + 1);
  cache.h[0] = DenseMatrix(bsz, nh);
  cache.x.resize(len);
  cache.z.resize(len);
  cache.r.resize(len);
  cache.c.resize(len);
  cache.dt.resize(len, Vector(bsz, 1.0));

  std::vector<Vector> mix(bsz), feat(bsz);
  for (std::size_t b = 0; b < bsz; ++b)
    step_sizes(m, *batch[b], mix[b], feat[b]);

  Scratch s{DenseMatrix(bsz, nh), DenseMatrix(bsz, nh), DenseMatrix(bsz, nh),
            DenseMatrix(bsz, nh)};
  DenseMatrix h = cache.h[0];
  for (std::size_t n = 0; n < len; ++n) {
    DenseMatrix x(bsz, na);
    for (std::size_t b = 0; b < bsz; ++b) {
      x(b, 0) = 1.0;
      for (std::size_t j = 0; j < m.cfg.n_in; ++j)
        x(b, 1 + j) = batch[b]->values(n, j);
      if (m.cfg.variant == GatedVariant::GRUT)
        x(b, 1 + m.cfg.n_in) = feat[b][n];
      cache.dt[n][b] = mix[b][n];
    }
    cache.x[n] = x;
    step_batch(m, x, h, cache.dt[n], s, &cache.z[n], &cache.r[n], &cache.c[n]);
    cache.h[n + 1] = h;
  }
  return cache;
}

// y = W_out [1; h] for a [B x H] state block.
DenseMatrix readout_batch(const GatedModel& m, const DenseMatrix& h) {
  const std::size_t bsz = h.rows();
  const std::size_t no = m.cfg.n_out;
  const std::size_t nh = m.cfg.n_hidden;
  DenseMatrix y(bsz, no);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t o = 0; o < no; ++o) y(b, o) = m.w_out(o, 0);
  kern::active().gemm_nt(h.data(), nh, m.w_out.data() + 1, 1 + nh, y.data(),
                         no, bsz, nh, no);
  return y;
}

GatedGrads zero_grads(const GatedModel& m) {
  GatedGrads g;
  g.w_z = DenseMatrix(m.w_z.rows(), m.w_z.cols());
  g.u_z = DenseMatrix(m.u_z.rows(), m.u_z.cols());
  g.w_r = DenseMatrix(m.w_r.rows(), m.w_r.cols());
  g.u_r = DenseMatrix(m.u_r.rows(), m.u_r.cols());
  g.w_h = DenseMatrix(m.w_h.rows(), m.w_h.cols());
  g.u_h = DenseMatrix(m.u_h.rows(), m.u_h.cols());
  g.w_out = DenseMatrix(m.w_out.rows(), m.w_out.cols());
  return g;
}

// dY[n] may be empty (no loss at that step).
GatedGrads backward_batch(const GatedModel& m, const ForwardCache& cache,
                          std::span<const DenseMatrix> dy) {
  const std::size_t bsz = cache.batch;
  const std::size_t len = cache.len;
  const std::size_t nh = m.cfg.n_hidden;
  const std::size_t no = m.cfg.n_out;
  const auto& K = kern::active();

  GatedGrads g = zero_grads(m);
  DenseMatrix dh(bsz, nh);
  DenseMatrix dz(bsz, nh), dc(bsz, nh), dr(bsz, nh), drh(bsz, nh);
  DenseMatrix rh(bsz, nh);

  for (std::size_t nn = len; nn-- > 0;) {
    const DenseMatrix& h_prev = cache.h[nn];
    const DenseMatrix& h_cur = cache.h[nn + 1];
    const DenseMatrix& z = cache.z[nn];
    const DenseMatrix& r = cache.r[nn];
    const DenseMatrix& c = cache.c[nn];
    const DenseMatrix& x = cache.x[nn];
    const Vector& dt = cache.dt[nn];

    if (nn < dy.size() && !dy[nn].empty()) {
      const DenseMatrix& d = dy[nn];
      // readout: bias column takes per-output sums, the rest is d^T h.
      for (std::size_t b = 0; b < bsz; ++b)
        for (std::size_t o = 0; o < no; ++o) g.w_out(o, 0) += d(b, o);
      K.gemm_tn(d.data(), no, h_cur.data(), nh, g.w_out.data() + 1, 1 + nh,
                no, bsz, nh);
      K.gemm_nn(d.data(), no, m.w_out.data() + 1, 1 + nh, dh.data(), nh, bsz,
                no, nh);
    }

    const bool adaptive = m.cfg.variant == GatedVariant::TAGRU;
    for (std::size_t b = 0; b < bsz; ++b) {
      const double dtb = adaptive ? dt[b] : 1.0;
      for (std::size_t i = 0; i < nh; ++i) {
        const double gi = dh(b, i);
        const double zi = z(b, i);
        const double ci = c(b, i);
        const double hp = h_prev(b, i);
        dz(b, i) = gi * dtb * (ci - hp) * zi * (1.0 - zi);   // d a_z
        dc(b, i) = gi * dtb * zi * (1.0 - ci * ci);          // d a_c
        dh(b, i) = gi * (1.0 - dtb * zi);                    // direct path
        rh(b, i) = r(b, i) * hp;
      }
    }

    drh.fill(0.0);
    K.gemm_nn(dc.data(), nh, m.u_h.data(), nh, drh.data(), nh, bsz, nh, nh);
    for (std::size_t b = 0; b < bsz; ++b)
      for (std::size_t i = 0; i < nh; ++i) {
        const double ri = r(b, i);
        dr(b, i) = drh(b, i) * h_prev(b, i) * ri * (1.0 - ri);  // d a_r
        dh(b, i) += drh(b, i) * ri;
      }

    const std::size_t na = x.cols();
    K.gemm_tn(dc.data(), nh, x.data(), na, g.w_h.data(), na, nh, bsz, na);
    K.gemm_tn(dc.data(), nh, rh.data(), nh, g.u_h.data(), nh, nh, bsz, nh);
    K.gemm_tn(dr.data(), nh, x.data(), na, g.w_r.data(), na, nh, bsz, na);
    K.gemm_tn(dr.data(), nh, h_prev.data(), nh, g.u_r.data(), nh, nh, bsz, nh);
    K.gemm_tn(dz.data(), nh, x.data(), na, g.w_z.data(), na, nh, bsz, na);
    K.gemm_tn(dz.data(), nh, h_prev.data(), nh, g.u_z.data(), nh, nh, bsz, nh);

    K.gemm_nn(dr.data(), nh, m.u_r.data(), nh, dh.data(), nh, bsz, nh, nh);
    K.gemm_nn(dz.data(), nh, m.u_z.data(), nh, dh.data(), nh, bsz, nh, nh);
  }
  return g;
}

}  // namespace

std::size_t GatedModel::param_count() const {
  return w_z.size() + u_z.size() + w_r.size() + u_r.size() + w_h.size() +
         u_h.size() + w_out.size();
}

double GatedGrads::global_norm() const {
  double s = 0.0;
  for (const DenseMatrix* m : {&w_z, &u_z, &w_r, &u_r, &w_h, &u_h, &w_out})
    s += kern::active().dot(m->size(), m->data(), m->data());
  return std::sqrt(s);
}

GatedModel init_gated(const GatedConfig& cfg, RngStream& rng) {
  if (cfg.n_hidden < 1)
    throw std::invalid_argument("init_gated: n_hidden must be >= 1");
  GatedModel m;
  m.cfg = cfg;
  const std::size_t na = 1 + m.n_in_eff();
  const std::size_t nh = cfg.n_hidden;
  const double kw = 1.0 / std::sqrt(static_cast<double>(na));
  const double ku = 1.0 / std::sqrt(static_cast<double>(nh));
  const double ko = 1.0 / std::sqrt(static_cast<double>(1 + nh));
  m.w_z = random_uniform_matrix(nh, na, kw, rng);
  m.u_z = random_uniform_matrix(nh, nh, ku, rng);
  m.w_r = random_uniform_matrix(nh, na, kw, rng);
  m.u_r = random_uniform_matrix(nh, nh, ku, rng);
  m.w_h = random_uniform_matrix(nh, na, kw, rng);
  m.u_h = random_uniform_matrix(nh, nh, ku, rng);
  m.w_out = random_uniform_matrix(cfg.n_out, 1 + nh, ko, rng);
  return m;
}

Vector gated_step(const GatedModel& m, std::span<const double> h_prev,
                  std::span<const double> x, double dt_effective,
                  GateRecord* record) {
  const std::size_t nh = m.cfg.n_hidden;
  if (h_prev.size() != nh)
    throw std::invalid_argument("gated_step: state size mismatch");
  if (x.size() != m.cfg.n_in)
    throw std::invalid_argument("gated_step: input size mismatch");
  if (m.cfg.variant == GatedVariant::TAGRU &&
      (dt_effective < 0.0 || dt_effective > 1.0 + kDtSlack))
    throw std::invalid_argument("gated_step: dt must lie in [0, 1]");

  const std::size_t na = 1 + m.n_in_eff();
  DenseMatrix xm(1, na);
  xm(0, 0) = 1.0;
  for (std::size_t j = 0; j < m.cfg.n_in; ++j) xm(0, 1 + j) = x[j];
  if (m.cfg.variant == GatedVariant::GRUT) xm(0, 1 + m.cfg.n_in) = dt_effective;

  DenseMatrix h(1, nh);
  std::copy(h_prev.begin(), h_prev.end(), h.row(0).begin());
  Scratch s{DenseMatrix(1, nh), DenseMatrix(1, nh), DenseMatrix(1, nh),
            DenseMatrix(1, nh)};
  Vector dt{dt_effective};
  DenseMatrix z, r, c;
  step_batch(m, xm, h, dt, s, &z, &r, &c);
  if (record) {
    record->z.assign(z.row(0).begin(), z.row(0).end());
    record->r.assign(r.row(0).begin(), r.row(0).end());
    record->candidate.assign(c.row(0).begin(), c.row(0).end());
  }
  return Vector(h.row(0).begin(), h.row(0).end());
}

ForwardResult forward(const GatedModel& m, const SampledSeries& series) {
  const SampledSeries* p = &series;
  ForwardResult res;
  res.cache = forward_batch(m, std::span<const SampledSeries* const>(&p, 1));
  res.outputs = DenseMatrix(series.length(), m.cfg.n_out);
  for (std::size_t n = 0; n < series.length(); ++n) {
    const DenseMatrix y = readout_batch(m, res.cache.h[n + 1]);
    for (std::size_t o = 0; o < m.cfg.n_out; ++o) res.outputs(n, o) = y(0, o);
  }
  return res;
}

GatedGrads backward(const GatedModel& m, const ForwardCache& cache,
                    const DenseMatrix& output_grads) {
  if (cache.batch != 1)
    throw std::invalid_argument("backward: cache is not single-sequence");
  if (output_grads.rows() != cache.len ||
      output_grads.cols() != m.cfg.n_out)
    throw std::invalid_argument("backward: output gradient shape mismatch");
  std::vector<DenseMatrix> dy(cache.len);
  for (std::size_t n = 0; n < cache.len; ++n) {
    dy[n] = DenseMatrix(1, m.cfg.n_out);
    for (std::size_t o = 0; o < m.cfg.n_out; ++o)
      dy[n](0, o) = output_grads(n, o);
  }
  return backward_batch(m, cache, dy);
}

namespace {

struct Flat {
  std::vector<DenseMatrix*> mats;
  explicit Flat(GatedModel& m)
      : mats{&m.w_z, &m.u_z, &m.w_r, &m.u_r, &m.w_h, &m.u_h, &m.w_out} {}
};

struct FlatG {
  std::vector<const DenseMatrix*> mats;
  explicit FlatG(const GatedGrads& g)
      : mats{&g.w_z, &g.u_z, &g.w_r, &g.u_r, &g.w_h, &g.u_h, &g.w_out} {}
};

class Adam {
 public:
  Adam(const GatedModel& m, double lr) : lr_(lr) {
    const GatedGrads z = zero_grads(m);
    for (const DenseMatrix* g : FlatG(z).mats) {
      m1_.emplace_back(g->rows(), g->cols());
      m2_.emplace_back(g->rows(), g->cols());
    }
  }

  void update(GatedModel& model, const GatedGrads& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    Flat params(model);
    FlatG gs(grads);
    for (std::size_t k = 0; k < params.mats.size(); ++k) {
      DenseMatrix& p = *params.mats[k];
      const DenseMatrix& g = *gs.mats[k];
      DenseMatrix& m1 = m1_[k];
      DenseMatrix& m2 = m2_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gv = g.data()[i];
        m1.data()[i] = beta1_ * m1.data()[i] + (1.0 - beta1_) * gv;
        m2.data()[i] = beta2_ * m2.data()[i] + (1.0 - beta2_) * gv * gv;
        const double mh = m1.data()[i] / bc1;
        const double vh = m2.data()[i] / bc2;
        p.data()[i] -= lr_ * mh / (std::sqrt(vh) + eps_);
      }
    }
  }

 private:
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<DenseMatrix> m1_, m2_;
};

void clip_global_norm(GatedGrads& g, double max_norm) {
  const double n = g.global_norm();
  if (n <= max_norm || n == 0.0) return;
  const double s = max_norm / n;
  for (DenseMatrix* m :
       {&g.w_z, &g.u_z, &g.w_r, &g.u_r, &g.w_h, &g.u_h, &g.w_out})
    *m *= s;
}

// Loss + output gradients for one batch. Returns summed loss and the
// element count it should be averaged over.
struct BatchLoss {
  double loss_sum = 0.0;
  double count = 0.0;
  std::size_t correct = 0;
};

BatchLoss batch_loss_and_grads(const GatedModel& m, const ForwardCache& cache,
                               std::span<const SampledSeries* const> batch,
                               GatedLoss loss, std::vector<DenseMatrix>* dy,
                               std::size_t tail = 0) {
  const std::size_t bsz = cache.batch;
  const std::size_t len = cache.len;
  const std::size_t no = m.cfg.n_out;
  BatchLoss out;
  if (dy) dy->assign(len, DenseMatrix());

  if (loss == GatedLoss::CrossEntropy) {
    const DenseMatrix y = readout_batch(m, cache.h[len]);
    DenseMatrix d(bsz, no);
    for (std::size_t b = 0; b < bsz; ++b) {
      if (!batch[b]->label)
        throw std::invalid_argument("cross-entropy loss needs labels");
      const int lbl = *batch[b]->label;
      double mx = y(b, 0);
      for (std::size_t o = 1; o < no; ++o) mx = std::max(mx, y(b, o));
      double zsum = 0.0;
      for (std::size_t o = 0; o < no; ++o) zsum += std::exp(y(b, o) - mx);
      const double logz = mx + std::log(zsum);
      out.loss_sum += logz - y(b, static_cast<std::size_t>(lbl));
      std::size_t arg = 0;
      for (std::size_t o = 1; o < no; ++o)
        if (y(b, o) > y(b, arg)) arg = o;
      if (static_cast<int>(arg) == lbl) ++out.correct;
      if (dy)
        for (std::size_t o = 0; o < no; ++o) {
          const double p = std::exp(y(b, o) - logz);
          d(b, o) = (p - (static_cast<int>(o) == lbl ? 1.0 : 0.0)) /
                    static_cast<double>(bsz);
        }
    }
    out.count = static_cast<double>(bsz);
    if (dy) dy->back() = std::move(d);
    return out;
  }

  // MSE over every scored step and output dimension.
  const std::size_t first = tail > 0 && tail < len ? len - tail : 0;
  const double denom = static_cast<double>(bsz * (len - first) * no);
  for (std::size_t n = first; n < len; ++n) {
    const DenseMatrix y = readout_batch(m, cache.h[n + 1]);
    DenseMatrix d(bsz, no);
    for (std::size_t b = 0; b < bsz; ++b) {
      if (!batch[b]->targets)
        throw std::invalid_argument("MSE loss needs per-step targets");
      for (std::size_t o = 0; o < no; ++o) {
        const double e = y(b, o) - (*batch[b]->targets)(n, o);
        out.loss_sum += e * e;
        d(b, o) = 2.0 * e / denom;
      }
    }
    if (dy) (*dy)[n] = std::move(d);
  }
  out.count = denom;
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(
    std::span<const SampledSeries> items, std::size_t batch_size,
    RngStream& rng, bool shuffle) {
  // Bucket by length so every batch is rectangular.
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < items.size(); ++i)
    buckets[items[i].length()].push_back(i);

  std::vector<std::vector<std::size_t>> batches;
  for (auto& [len, idx] : buckets) {
    if (shuffle)
      for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
    for (std::size_t at = 0; at < idx.size(); at += batch_size) {
      const std::size_t end = std::min(at + batch_size, idx.size());
      batches.emplace_back(idx.begin() + at, idx.begin() + end);
    }
  }
  if (shuffle)
    for (std::size_t i = batches.size(); i > 1; --i)
      std::swap(batches[i - 1], batches[rng.next_below(i)]);
  return batches;
}

BatchLoss evaluate(const GatedModel& m, std::span<const SampledSeries> items,
                   GatedLoss loss, std::size_t tail = 0) {
  BatchLoss total;
  const auto batches = [&] {
    RngStream dummy(0);
    return make_batches(items, 256, dummy, false);
  }();
  for (const auto& idx : batches) {
    std::vector<const SampledSeries*> ptrs(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ptrs[i] = &items[idx[i]];
    const ForwardCache cache = forward_batch(m, ptrs);
    const BatchLoss bl =
        batch_loss_and_grads(m, cache, ptrs, loss, nullptr, tail);
    total.loss_sum += bl.loss_sum;
    total.count += bl.count;
    total.correct += bl.correct;
  }
  return total;
}

}  // namespace

TrainResult train(const GatedModel& m, std::span<const SampledSeries> train_set,
                  std::span<const SampledSeries> val_set,
                  const TrainConfig& cfg) {
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train: empty train or validation split");

  TrainResult res;
  res.model = m;
  GatedModel cur = m;
  Adam opt(cur, cfg.learning_rate);
  RngStream rng(cfg.seed);
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(train_set, cfg.batch_size, rng, true);
    double loss_sum = 0.0, count = 0.0;
    std::vector<DenseMatrix> dy;
    for (const auto& idx : batches) {
      std::vector<const SampledSeries*> ptrs(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) ptrs[i] = &train_set[idx[i]];
      const ForwardCache cache = forward_batch(cur, ptrs);
      const BatchLoss bl = batch_loss_and_grads(cur, cache, ptrs, cfg.loss, &dy);
      loss_sum += bl.loss_sum;
      count += bl.count;
      GatedGrads grads = backward_batch(cur, cache, dy);
      clip_global_norm(grads, cfg.grad_clip);
      opt.update(cur, grads);
    }
    const double train_loss = loss_sum / count;

    const BatchLoss vl = evaluate(cur, val_set, cfg.loss, cfg.val_tail);
    const double val_loss = vl.loss_sum / vl.count;
    double metric;
    if (cfg.loss == GatedLoss::CrossEntropy)
      metric = static_cast<double>(vl.correct) / vl.count;
    else
      metric = std::sqrt(val_loss);

    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw std::runtime_error(
          "train: loss diverged at epoch " + std::to_string(epoch) +
          " (train=" + std::to_string(train_loss) +
          ", val=" + std::to_string(val_loss) + ")");

    res.history.push_back({epoch, train_loss, val_loss, metric});
    if (val_loss < best_val) {
      best_val = val_loss;
      res.model = cur;
      res.best_epoch = epoch;
    }
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %zu train %.6f val %.6f metric %.4f\n",
                   epoch, train_loss, val_loss, metric);
  }
  return res;
}

double classification_accuracy(const GatedModel& m,
                               std::span<const SampledSeries> items) {
  const BatchLoss bl = evaluate(m, items, GatedLoss::CrossEntropy);
  return static_cast<double>(bl.correct) / bl.count;
}

double evaluate_loss(const GatedModel& m, std::span<const SampledSeries> items,
                     GatedLoss loss, std::size_t tail) {
  const BatchLoss bl = evaluate(m, items, loss, tail);
  return bl.loss_sum / bl.count;
}

int classify(const GatedModel& m, const SampledSeries& series) {
  const ForwardResult res = forward(m, series);
  const std::size_t last = series.length() - 1;
  std::size_t best = 0;
  for (std::size_t o = 1; o < m.cfg.n_out; ++o)
    if (res.outputs(last, o) > res.outputs(last, best)) best = o;
  return static_cast<int>(best);
}

DenseMatrix predict_sequence(const GatedModel& m, const SampledSeries& series) {
  return forward(m, series).outputs;
}

SampledSeries run_generative(const GatedModel& m, const SampledSeries& primer,
                             std::span<const double> horizon_deltas) {
  if (primer.length() == 0)
    throw std::invalid_argument("run_generative: empty primer");
  if (m.cfg.n_out != m.cfg.n_in)
    throw std::invalid_argument("run_generative: feedback needs n_out == n_in");

  // Absorb the primer; the loop is seeded with the model's own prediction
  // at the primer's last row.
  const ForwardResult res = forward(m, primer);
  const auto hl = res.cache.h[primer.length()].row(0);
  Vector h(hl.begin(), hl.end());
  Vector value(res.outputs.row(primer.length() - 1).begin(),
               res.outputs.row(primer.length() - 1).end());
  double now = primer.timestamps.back();

  SampledSeries out;
  out.values = DenseMatrix(horizon_deltas.size(), m.cfg.n_out);
  for (std::size_t k = 0; k < horizon_deltas.size(); ++k) {
    double dt_eff = 1.0;
    if (m.cfg.variant != GatedVariant::GRU) {
      dt_eff = m.cfg.transform.apply(horizon_deltas[k]);
      if (m.cfg.variant == GatedVariant::GRUT && m.cfg.raw_dt_input)
        dt_eff = horizon_deltas[k];
    }
    h = gated_step(m, h, value, dt_eff);
    Vector feat(1 + m.cfg.n_hidden);
    feat[0] = 1.0;
    std::copy(h.begin(), h.end(), feat.begin() + 1);
    value = matvec(m.w_out, feat);
    now += horizon_deltas[k];
    out.timestamps.push_back(now);
    for (std::size_t o = 0; o < m.cfg.n_out; ++o) out.values(k, o) = value[o];
  }
  return out;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,val_metric\n";
  char buf[128];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", e.epoch,
                  e.train_loss, e.val_loss, e.val_metric);
    out << buf;
  }
}

const char* to_string(GatedVariant v) {
  switch (v) {
    case GatedVariant::GRU: return "gru";
    case GatedVariant::GRUT: return "grut";
    default: return "tagru";
  }
}

GatedVariant gated_variant_from_string(const std::string& s) {
  if (s == "gru") return GatedVariant::GRU;
  if (s == "grut") return GatedVariant::GRUT;
  if (s == "tagru") return GatedVariant::TAGRU;
  throw std::invalid_argument("unknown gated variant: " + s);
}

}  // namespace tarnn
