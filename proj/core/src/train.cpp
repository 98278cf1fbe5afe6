#include "dlinoss/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>

#include "dlinoss/errors.hpp"
#include "dlinoss/parallel.hpp"
#include "dlinoss/parameterize.hpp"
#include "dlinoss/rng.hpp"
#include "dlinoss/scan.hpp"

namespace dlinoss {

std::string metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::Mse: return "mse";
    case MetricKind::Rmse: return "rmse";
    case MetricKind::Accuracy: return "accuracy";
  }
  return "?";
}

MetricKind metric_from_name(const std::string& name) {
  if (name == "mse") return MetricKind::Mse;
  if (name == "rmse") return MetricKind::Rmse;
  if (name == "accuracy") return MetricKind::Accuracy;
  throw ConfigError("unknown metric '" + name + "'");
}

std::string run_status_name(RunStatus s) {
  return s == RunStatus::Ok ? "ok" : "diverged";
}

namespace {

// Squared-error / hit accumulators so split metrics aggregate globally.
struct MetricAccum {
  double sum = 0.0;
  double count = 0.0;

  void add(MetricKind kind, std::span<const double> outputs, const SeqBatch& batch,
           const TargetBatch& targets) {
    const std::size_t q = targets.dim;
    if (kind == MetricKind::Accuracy) {
      if (!targets.classification) throw ConfigError("accuracy needs classification targets");
      for (std::size_t i = 0; i < batch.items; ++i) {
        const double* y = outputs.data() + i * q;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < q; ++j)
          if (y[j] > y[arg]) arg = j;
        sum += arg == static_cast<std::size_t>(targets.labels[i]) ? 1.0 : 0.0;
        count += 1.0;
      }
      return;
    }
    if (targets.classification) throw ConfigError("mse needs regression targets");
    if (targets.per_step) {
      for (std::size_t i = 0; i < batch.items; ++i) {
        const std::size_t len = batch.lengths[i];
        const double* y = outputs.data() + i * batch.max_len * q;
        const double* t = targets.values.data() + i * batch.max_len * q;
        for (std::size_t e = 0; e < len * q; ++e) {
          const double d = y[e] - t[e];
          sum += d * d;
        }
        count += static_cast<double>(len * q);
      }
    } else {
      for (std::size_t e = 0; e < batch.items * q; ++e) {
        const double d = outputs[e] - targets.values[e];
        sum += d * d;
      }
      count += static_cast<double>(batch.items * q);
    }
  }

  double value(MetricKind kind) const {
    if (count == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double mean = sum / count;
    return kind == MetricKind::Rmse ? std::sqrt(mean) : mean;
  }
};

}  // namespace

double mse(std::span<const double> outputs, const SeqBatch& batch, const TargetBatch& targets) {
  MetricAccum acc;
  acc.add(MetricKind::Mse, outputs, batch, targets);
  return acc.value(MetricKind::Mse);
}

double rmse(std::span<const double> outputs, const SeqBatch& batch, const TargetBatch& targets) {
  MetricAccum acc;
  acc.add(MetricKind::Rmse, outputs, batch, targets);
  return acc.value(MetricKind::Rmse);
}

double accuracy(std::span<const double> outputs, const SeqBatch& batch,
                const TargetBatch& targets) {
  MetricAccum acc;
  acc.add(MetricKind::Accuracy, outputs, batch, targets);
  return acc.value(MetricKind::Accuracy);
}

namespace {

// Per-block activation-chain state shared by all items of a step.
struct BlockChain {
  Dynamics dyn;
  std::vector<int> clamp_state;  // 0 interior, -1 at lower bound, +1 at upper
  std::vector<ClampBoundsGrads> bound_grads;
};

BlockChain make_chain(const ModelConfig& config, const BlockWeights& blk) {
  UnconstrainedParams raw;
  raw.dt_bar = blk.dt_bar;
  raw.a_bar = blk.a_bar;
  raw.g_bar = blk.g_bar.empty() ? std::vector<double>(blk.dt_bar.size(), 0.0) : blk.g_bar;
  BlockChain chain;
  chain.dyn = constrain(raw);
  const std::size_t m = chain.dyn.count();
  chain.clamp_state.resize(m);
  chain.bound_grads.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ClampBounds b = stability_bounds(chain.dyn.g[i], chain.dyn.dt[i]);
    if (blk.a_bar[i] <= b.lo)
      chain.clamp_state[i] = -1;
    else if (blk.a_bar[i] >= b.hi)
      chain.clamp_state[i] = 1;
    else
      chain.clamp_state[i] = 0;
    if (chain.clamp_state[i] != 0)
      chain.bound_grads[i] = stability_bounds_grads(chain.dyn.g[i], chain.dyn.dt[i]);
  }
  return chain;
}

// dLoss/dOutput for one item. Per-step outputs use a batch-global element
// count so the batch loss is a plain mean.
void loss_grad_item(LossKind loss, const TargetBatch& targets, std::size_t item,
                    std::size_t max_len, std::size_t len, const double* y, double norm,
                    double* dy, double& loss_acc) {
  const std::size_t q = targets.dim;
  if (loss == LossKind::CrossEntropy) {
    if (!targets.classification) throw ConfigError("cross-entropy needs class labels");
    const int label = targets.labels[item];
    if (label < 0 || static_cast<std::size_t>(label) >= q)
      throw ConfigError("label outside the configured class count");
    double mx = y[0];
    for (std::size_t j = 1; j < q; ++j) mx = std::max(mx, y[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < q; ++j) z += std::exp(y[j] - mx);
    const double log_z = std::log(z) + mx;
    loss_acc += (log_z - y[label]) / norm;
    for (std::size_t j = 0; j < q; ++j) {
      const double p = std::exp(y[j] - log_z);
      dy[j] = (p - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) / norm;
    }
    return;
  }
  if (targets.classification) throw ConfigError("mse needs regression targets");
  if (targets.per_step) {
    const double* t = targets.values.data() + item * max_len * q;
    for (std::size_t e = 0; e < len * q; ++e) {
      const double d = y[e] - t[e];
      loss_acc += d * d / norm;
      dy[e] = 2.0 * d / norm;
    }
    for (std::size_t e = len * q; e < max_len * q; ++e) dy[e] = 0.0;
  } else {
    const double* t = targets.values.data() + item * q;
    for (std::size_t j = 0; j < q; ++j) {
      const double d = y[j] - t[j];
      loss_acc += d * d / norm;
      dy[j] = 2.0 * d / norm;
    }
  }
}

// Reusable per-worker buffers for the backward pass.
struct BackwardScratch {
  std::vector<double> d_stream, ds, dx, rev_off, adj, qbuf, d_prev;
  std::vector<double> dm11, dm12, dm21, dm22, df1, df2;
  ScanWorkspace scan_ws;
};

void backward_item(const ModelConfig& config, const Weights& w,
                   std::span<const DiscreteSystem> systems,
                   std::span<const BlockChain> chains, const ForwardCache& cache,
                   std::size_t len, const double* dy, Weights& grads,
                   BackwardScratch& scratch) {
  const std::size_t h = config.hidden_dim, m = config.state_dim, q = config.output_dim;
  const std::size_t pe = config.encoder_in();

  scratch.d_stream.assign(len * h, 0.0);
  std::vector<double>& d_stream = scratch.d_stream;
  const std::vector<double>& top = cache.streams[config.num_blocks];

  // readout
  switch (config.readout) {
    case Readout::PerStep:
      for (std::size_t k = 0; k < len; ++k) {
        outer_acc(grads.dec_w, dy + k * q, top.data() + k * h);
        for (std::size_t j = 0; j < q; ++j) grads.dec_b[j] += dy[k * q + j];
        matvec_t(w.dec_w, dy + k * q, d_stream.data() + k * h);
      }
      break;
    case Readout::MeanPool: {
      std::vector<double> pooled(h, 0.0);
      for (std::size_t k = 0; k < len; ++k)
        for (std::size_t j = 0; j < h; ++j) pooled[j] += top[k * h + j];
      const double inv_len = 1.0 / static_cast<double>(len);
      for (std::size_t j = 0; j < h; ++j) pooled[j] *= inv_len;
      outer_acc(grads.dec_w, dy, pooled.data());
      for (std::size_t j = 0; j < q; ++j) grads.dec_b[j] += dy[j];
      std::vector<double> dh(h);
      matvec_t(w.dec_w, dy, dh.data());
      for (std::size_t k = 0; k < len; ++k)
        for (std::size_t j = 0; j < h; ++j) d_stream[k * h + j] = dh[j] * inv_len;
      break;
    }
    case Readout::LastToken: {
      outer_acc(grads.dec_w, dy, top.data() + (len - 1) * h);
      for (std::size_t j = 0; j < q; ++j) grads.dec_b[j] += dy[j];
      matvec_t(w.dec_w, dy, d_stream.data() + (len - 1) * h);
      break;
    }
  }

  scratch.ds.resize(len * h);
  scratch.dx.resize(len * m);
  scratch.rev_off.resize(len * 2 * m);
  scratch.adj.resize(len * 2 * m);
  scratch.qbuf.resize(len * m);
  scratch.d_prev.resize(len * h);
  std::vector<double>& ds = scratch.ds;
  std::vector<double>& dx = scratch.dx;
  std::vector<double>& rev_off = scratch.rev_off;
  std::vector<double>& adj = scratch.adj;
  std::vector<double>& qbuf = scratch.qbuf;
  std::vector<double>& d_prev = scratch.d_prev;
  std::vector<double> act(h), dpo(h), dpg(h), dgl(h), dgl2(h);

  for (std::size_t b = config.num_blocks; b-- > 0;) {
    const BlockWeights& blk = w.blocks[b];
    BlockWeights& gblk = grads.blocks[b];
    const DiscreteSystem& sys = systems[b];
    const BlockChain& chain = chains[b];
    const BlockCache& bc = cache.blocks[b];
    const std::vector<double>& stream_in = cache.streams[b];

    // mixing backward (the forward cached sigma(pre_gate) and Phi(s))
    if (config.mixing == Mixing::Glu) {
      for (std::size_t k = 0; k < len; ++k) {
        const double* dnext = d_stream.data() + k * h;
        const double* po = bc.pre_out.data() + k * h;
        const double* gate = bc.gate.data() + k * h;
        const double* cdf = bc.gelu_cdf.data() + k * h;
        const double* s = bc.ssm_out.data() + k * h;
        for (std::size_t j = 0; j < h; ++j) {
          act[j] = s[j] * cdf[j];
          dpo[j] = dnext[j] * gate[j];
          dpg[j] = dnext[j] * po[j] * gate[j] * (1.0 - gate[j]);
        }
        outer_acc(gblk.w_out, dpo.data(), act.data());
        outer_acc(gblk.w_gate, dpg.data(), act.data());
        for (std::size_t j = 0; j < h; ++j) {
          gblk.b_out[j] += dpo[j];
          gblk.b_gate[j] += dpg[j];
        }
        matvec_t(blk.w_out, dpo.data(), dgl.data());
        matvec_t(blk.w_gate, dpg.data(), dgl2.data());
        double* dsk = ds.data() + k * h;
        for (std::size_t j = 0; j < h; ++j) {
          const double pdf = 0.3989422804014326779 * std::exp(-0.5 * s[j] * s[j]);
          dsk[j] = (dgl[j] + dgl2[j]) * (cdf[j] + s[j] * pdf);
        }
      }
    } else {
      std::copy(d_stream.begin(), d_stream.end(), ds.begin());
    }

    // readout map of the SSM layer (C x + d_feed . u)
    for (std::size_t k = 0; k < len; ++k) {
      const double* xk = bc.states.data() + k * 2 * m + m;
      outer_acc(gblk.c_out, ds.data() + k * h, xk);
      matvec_t(blk.c_out, ds.data() + k * h, dx.data() + k * m);
      const double* dsk = ds.data() + k * h;
      const double* uk = stream_in.data() + k * h;
      for (std::size_t j = 0; j < h; ++j) gblk.d_feed[j] += dsk[j] * uk[j];
    }

    // adjoint recurrence a_k = dx_k + M^T a_{k+1}, evaluated as a reversed
    // scan with transposed blocks.
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t k = len - 1 - j;
      double* off = rev_off.data() + j * 2 * m;
      for (std::size_t i = 0; i < m; ++i) {
        off[i] = 0.0;
        off[m + i] = dx[k * m + i];
      }
    }
    scan_lti(sys.m11, sys.m21, sys.m12, sys.m22, rev_off, len, ScanMode::Parallel, adj,
             &scratch.scan_ws);

    // transition/offset gradients
    scratch.dm11.assign(m, 0.0);
    scratch.dm12.assign(m, 0.0);
    scratch.dm21.assign(m, 0.0);
    scratch.dm22.assign(m, 0.0);
    scratch.df1.assign(m, 0.0);
    scratch.df2.assign(m, 0.0);
    std::vector<double>& dm11 = scratch.dm11;
    std::vector<double>& dm12 = scratch.dm12;
    std::vector<double>& dm21 = scratch.dm21;
    std::vector<double>& dm22 = scratch.dm22;
    std::vector<double>& df1 = scratch.df1;
    std::vector<double>& df2 = scratch.df2;
    for (std::size_t k = 0; k < len; ++k) {
      const double* a_k = adj.data() + (len - 1 - k) * 2 * m;
      const double* pk = bc.proj.data() + k * m;
      double* qk = qbuf.data() + k * m;
      if (k >= 1) {
        const double* wprev = bc.states.data() + (k - 1) * 2 * m;
        for (std::size_t i = 0; i < m; ++i) {
          const double az = a_k[i], ax = a_k[m + i];
          dm11[i] += az * wprev[i];
          dm12[i] += az * wprev[m + i];
          dm21[i] += ax * wprev[i];
          dm22[i] += ax * wprev[m + i];
        }
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double az = a_k[i], ax = a_k[m + i];
        df1[i] += az * pk[i];
        df2[i] += ax * pk[i];
        qk[i] = sys.f1[i] * az + sys.f2[i] * ax;
      }
    }

    // input-map gradient and the pass-down into the previous stream
    for (std::size_t k = 0; k < len; ++k) {
      outer_acc(gblk.b_in, qbuf.data() + k * m, stream_in.data() + k * h);
      matvec_t(blk.b_in, qbuf.data() + k * m, d_prev.data() + k * h);
      const double* dsk = ds.data() + k * h;
      const double* dnext = d_stream.data() + k * h;
      double* dp = d_prev.data() + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        dp[j] += dsk[j] * blk.d_feed[j];
        if (blk.skip) dp[j] += dnext[j];
      }
    }

    // chain rule through the discretization and the stability activations
    const bool damped = config.variant != Variant::LinossIm;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = chain.dyn.a[i], g = chain.dyn.g[i], dt = chain.dyn.dt[i];
      double da, dg, ddt;
      if (damped) {
        const double s = 1.0 + dt * g;
        const double inv = 1.0 / s, inv2 = inv * inv;
        da = dm12[i] * (-dt * inv) + dm22[i] * (-dt * dt * inv);
        dg = dm11[i] * (-dt * inv2) + dm12[i] * (dt * dt * a * inv2) +
             dm21[i] * (-dt * dt * inv2) + dm22[i] * (dt * dt * dt * a * inv2) +
             df1[i] * (-dt * dt * inv2) + df2[i] * (-dt * dt * dt * inv2);
        ddt = dm11[i] * (-g * inv2) + dm12[i] * (-a * inv2) + dm21[i] * inv2 +
              dm22[i] * (-dt * a * (2.0 + dt * g) * inv2) + df1[i] * inv2 +
              df2[i] * (dt * (2.0 + dt * g) * inv2);
      } else {
        const double s = 1.0 + dt * dt * a;
        const double inv2 = 1.0 / (s * s);
        const double dt2 = dt * dt;
        da = dm11[i] * (-dt2 * inv2) + dm12[i] * (-dt * inv2) +
             dm21[i] * (-dt2 * dt * inv2) + dm22[i] * (-dt2 * inv2) +
             df1[i] * (-dt2 * dt * inv2) + df2[i] * (-dt2 * dt2 * inv2);
        dg = 0.0;
        ddt = dm11[i] * (-2.0 * dt * a * inv2) + dm12[i] * (a * (dt2 * a - 1.0) * inv2) +
              dm21[i] * ((1.0 - dt2 * a) * inv2) + dm22[i] * (-2.0 * dt * a * inv2) +
              df1[i] * ((1.0 - dt2 * a) * inv2) + df2[i] * (2.0 * dt * inv2);
      }
      // clamp: pass-through inside the interval; on a bound A follows the
      // bound's dependence on (G, dt)
      if (chain.clamp_state[i] == 0) {
        gblk.a_bar[i] += da;
      } else {
        const ClampBoundsGrads& bg = chain.bound_grads[i];
        dg += da * (chain.clamp_state[i] < 0 ? bg.lo_g : bg.hi_g);
        ddt += da * (chain.clamp_state[i] < 0 ? bg.lo_dt : bg.hi_dt);
      }
      if (!blk.g_bar.empty() && blk.g_bar[i] > 0.0) gblk.g_bar[i] += dg;
      gblk.dt_bar[i] += ddt * dt * (1.0 - dt);
    }

    std::swap(d_stream, d_prev);
  }

  // encoder
  for (std::size_t k = 0; k < len; ++k) {
    outer_acc(grads.enc_w, d_stream.data() + k * h, cache.input.data() + k * pe);
    for (std::size_t j = 0; j < h; ++j) grads.enc_b[j] += d_stream[k * h + j];
  }
}

}  // namespace

LossGrads loss_and_gradients(const ModelConfig& config, const Weights& w, const SeqBatch& batch,
                             const TargetBatch& targets, LossKind loss) {
  config.validate();
  batch.validate();
  const std::size_t q = config.output_dim;
  if (targets.dim != q) throw ConfigError("target width does not match the model output");
  const bool per_step = config.readout == Readout::PerStep;
  if (targets.per_step != per_step)
    throw ConfigError("target granularity does not match the readout");

  auto systems = build_systems(config, w);
  std::vector<BlockChain> chains;
  chains.reserve(config.num_blocks);
  for (const auto& blk : w.blocks) chains.push_back(make_chain(config, blk));

  double norm;
  if (loss == LossKind::CrossEntropy) {
    norm = static_cast<double>(batch.items);
  } else if (per_step) {
    std::size_t elems = 0;
    for (std::size_t len : batch.lengths) elems += len * q;
    norm = static_cast<double>(elems);
  } else {
    norm = static_cast<double>(batch.items * q);
  }

  std::vector<Weights> item_grads(batch.items);
  std::vector<double> item_loss(batch.items, 0.0);
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_chunks(batch.items, [&](std::size_t lo, std::size_t hi) {
    ForwardCache cache;
    BackwardScratch scratch;
    const std::size_t out_len = per_step ? batch.max_len * q : q;
    std::vector<double> y(out_len), dy(out_len);
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        item_grads[i] = zeros_like(config);
        const std::size_t len = batch.lengths[i];
        forward_item(config, w, systems, batch.item(i), len, batch.max_len, y.data(), cache);
        loss_grad_item(loss, targets, i, batch.max_len, len, y.data(), norm, dy.data(),
                       item_loss[i]);
        backward_item(config, w, systems, chains, cache, len, dy.data(), item_grads[i],
                      scratch);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  });
  if (failure) std::rethrow_exception(failure);

  LossGrads out;
  out.grads = zeros_like(config);
  for (std::size_t i = 0; i < batch.items; ++i) {
    out.loss += item_loss[i];
    std::vector<std::vector<double>*> dst, src;
    for_each_tensor(out.grads, [&](std::vector<double>& t) { dst.push_back(&t); });
    for_each_tensor(item_grads[i], [&](std::vector<double>& t) { src.push_back(&t); });
    for (std::size_t t = 0; t < dst.size(); ++t)
      for (std::size_t e = 0; e < dst[t]->size(); ++e) (*dst[t])[e] += (*src[t])[e];
  }
  return out;
}

void Adam::step(Weights& w, const Weights& grads) {
  std::vector<std::vector<double>*> params;
  std::vector<const std::vector<double>*> gs;
  for_each_tensor(w, [&](std::vector<double>& t) { params.push_back(&t); });
  for_each_tensor(grads, [&](const std::vector<double>& t) { gs.push_back(&t); });
  std::size_t total = 0;
  for (auto* p : params) total += p->size();
  if (m_.empty()) {
    m_.assign(total, 0.0);
    v_.assign(total, 0.0);
  } else if (m_.size() != total) {
    throw ConfigError("optimizer state does not match the parameter count");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t off = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = *params[t];
    const auto& g = *gs[t];
    for (std::size_t e = 0; e < p.size(); ++e) {
      double& mm = m_[off + e];
      double& vv = v_[off + e];
      mm = beta1_ * mm + (1.0 - beta1_) * g[e];
      vv = beta2_ * vv + (1.0 - beta2_) * g[e] * g[e];
      p[e] -= lr_ * (mm / bc1) / (std::sqrt(vv / bc2) + eps_);
    }
    off += p.size();
  }
}

double evaluate_split(const ModelConfig& config, const Weights& w, const Dataset& data,
                      std::span<const std::size_t> indices, MetricKind metric,
                      std::size_t eval_batch) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto systems = build_systems(config, w);
  MetricAccum acc;
  for (std::size_t lo = 0; lo < indices.size(); lo += eval_batch) {
    const std::size_t hi = std::min(indices.size(), lo + eval_batch);
    Batch batch = make_batch(data, indices.subspan(lo, hi - lo));
    auto out = forward_with_systems(config, w, systems, batch.inputs);
    acc.add(metric, out, batch.inputs, batch.targets);
  }
  return acc.value(metric);
}

TrainOutcome train_loop(const ModelConfig& config, const InitSpec& init, const Dataset& data,
                        const TrainOptions& options) {
  config.validate();
  data.validate();
  if (data.train_idx.empty()) throw ConfigError("training requires a non-empty train split");
  if (data.features != config.input_dim)
    throw ConfigError("dataset features do not match the model input dimension");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  TrainOutcome outcome;
  Weights weights = init_weights(config, init, options.seed);
  outcome.best_weights = weights;
  Adam adam(options.lr);

  Rng shuffle_rng = Rng(options.seed).fork(0xda7a);
  std::vector<std::size_t> order(data.train_idx.begin(), data.train_idx.end());
  std::size_t cursor = order.size();  // force initial shuffle
  auto next_batch_indices = [&](std::size_t want) {
    std::vector<std::size_t> idxs;
    idxs.reserve(want);
    while (idxs.size() < want) {
      if (cursor >= order.size()) {
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        cursor = 0;
      }
      idxs.push_back(order[cursor++]);
    }
    return idxs;
  };

  const std::size_t batch_size = std::min(options.batch_size, order.size());
  const std::string val_name = metric_name(options.val_metric);
  bool stop = false;
  for (std::size_t step = 1; step <= options.max_steps && !stop; ++step) {
    const auto idxs = next_batch_indices(batch_size);
    Batch batch = make_batch(data, idxs);
    double train_loss;
    try {
      LossGrads lg = loss_and_gradients(config, weights, batch.inputs, batch.targets,
                                        options.loss);
      train_loss = lg.loss;
      if (!std::isfinite(train_loss)) throw DivergedError("non-finite training loss");
      adam.step(weights, lg.grads);
    } catch (const DivergedError&) {
      outcome.status = RunStatus::Diverged;
      outcome.steps_run = step;
      break;
    }
    outcome.steps_run = step;

    if (options.eval_every > 0 &&
        (step % options.eval_every == 0 || step == options.max_steps)) {
      outcome.history.push_back({step, "train", "loss", train_loss, elapsed_ms()});
      if (!data.val_idx.empty()) {
        const double val = evaluate_split(config, weights, data, data.val_idx,
                                          options.val_metric, options.eval_batch);
        outcome.history.push_back({step, "val", val_name, val, elapsed_ms()});
        // accuracy is maximized; track the negated value so "best" is uniform
        const double keyed = options.val_metric == MetricKind::Accuracy ? -val : val;
        if (keyed < outcome.best_val) {
          outcome.best_val = keyed;
          outcome.best_step = step;
          outcome.best_weights = weights;
        }
        if (!std::isnan(options.target_val) && outcome.steps_to_threshold == kNeverReached) {
          const bool reached = options.val_metric == MetricKind::Accuracy
                                   ? val >= options.target_val
                                   : val <= options.target_val;
          if (reached) {
            outcome.steps_to_threshold = step;
            if (options.stop_at_target) stop = true;
          }
        }
        if (options.patience > 0 && step - outcome.best_step >= options.patience) stop = true;
      }
    }
  }

  if (data.val_idx.empty()) outcome.best_weights = weights;
  if (options.val_metric == MetricKind::Accuracy &&
      outcome.best_val != std::numeric_limits<double>::infinity())
    outcome.best_val = -outcome.best_val;
  if (!data.test_idx.empty())
    outcome.test_metric = evaluate_split(config, outcome.best_weights, data, data.test_idx,
                                         options.test_metric, options.eval_batch);
  outcome.wall_ms_total = elapsed_ms();
  return outcome;
}

}  // namespace dlinoss
