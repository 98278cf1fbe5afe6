#include "dlinoss/model.hpp"

#include <cmath>
#include <exception>
#include <mutex>

#include "dlinoss/errors.hpp"
#include "dlinoss/parallel.hpp"
#include "dlinoss/parameterize.hpp"
#include "dlinoss/scan.hpp"

namespace dlinoss {

std::string readout_name(Readout r) {
  switch (r) {
    case Readout::PerStep: return "per-step";
    case Readout::MeanPool: return "mean-pool";
    case Readout::LastToken: return "last-token";
  }
  return "?";
}

Readout readout_from_name(const std::string& name) {
  if (name == "per-step") return Readout::PerStep;
  if (name == "mean-pool") return Readout::MeanPool;
  if (name == "last-token") return Readout::LastToken;
  throw ConfigError("unknown readout '" + name + "'");
}

void ModelConfig::validate() const {
  if (hidden_dim < 1 || state_dim < 1 || input_dim < 1 || output_dim < 1)
    throw ConfigError("model dimensions must be >= 1");
}

void SeqBatch::validate() const {
  if (x.size() != items * max_len * features)
    throw ConfigError("batch buffer does not match items x max_len x features");
  if (lengths.size() != items) throw ConfigError("batch needs one length per item");
  for (std::size_t len : lengths)
    if (len < 1 || len > max_len) throw ConfigError("sequence lengths must lie in [1, max_len]");
}

std::size_t count_params(const ModelConfig& config) {
  config.validate();
  const std::size_t h = config.hidden_dim, m = config.state_dim;
  const std::size_t pe = config.encoder_in(), q = config.output_dim;
  // dt_bar, a_bar, input/output maps, feed-through, mixing weights + biases
  std::size_t per_block = 2 * m + m * h + h * m + h + 2 * h * h + 2 * h;
  if (config.variant == Variant::DLinossImex) per_block += m;  // damping vector
  return h * pe + h + config.num_blocks * per_block + q * h + q;
}

Weights zeros_like(const ModelConfig& config) {
  config.validate();
  const std::size_t h = config.hidden_dim, m = config.state_dim;
  Weights w;
  w.enc_w = Mat(h, config.encoder_in());
  w.enc_b.assign(h, 0.0);
  w.dec_w = Mat(config.output_dim, h);
  w.dec_b.assign(config.output_dim, 0.0);
  w.blocks.resize(config.num_blocks);
  for (auto& blk : w.blocks) {
    blk.dt_bar.assign(m, 0.0);
    blk.a_bar.assign(m, 0.0);
    if (config.variant == Variant::DLinossImex) blk.g_bar.assign(m, 0.0);
    blk.b_in = Mat(m, h);
    blk.c_out = Mat(h, m);
    blk.d_feed.assign(h, 0.0);
    blk.w_out = Mat(h, h);
    blk.w_gate = Mat(h, h);
    blk.b_out.assign(h, 0.0);
    blk.b_gate.assign(h, 0.0);
  }
  return w;
}

namespace {

void glorot(Mat& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
  for (auto& v : m.a) v = rng.uniform(-limit, limit);
}

}  // namespace

Weights init_weights(const ModelConfig& config, const InitSpec& init, std::uint64_t seed) {
  init.validate();
  Weights w = zeros_like(config);
  Rng rng(seed);
  Rng enc_rng = rng.fork(0);
  glorot(w.enc_w, enc_rng);
  Rng dec_rng = rng.fork(1);
  glorot(w.dec_w, dec_rng);
  for (std::size_t b = 0; b < config.num_blocks; ++b) {
    BlockWeights& blk = w.blocks[b];
    Rng mix_rng = rng.fork(2 + b);
    glorot(blk.b_in, mix_rng);
    glorot(blk.c_out, mix_rng);
    for (auto& v : blk.d_feed) v = mix_rng.normal();
    glorot(blk.w_out, mix_rng);
    glorot(blk.w_gate, mix_rng);
    // dt_bar stays 0 (dt = 1/2)
    const std::vector<double> dt(config.state_dim, 0.5);
    Rng osc_rng = rng.fork(1000 + b);
    if (config.variant == Variant::DLinossImex) {
      Dynamics dyn = init_oscillators(init, config.state_dim, dt, osc_rng);
      blk.a_bar = dyn.a;
      blk.g_bar = dyn.g;
    } else {
      // Baselines have no damping; draw A uniformly over the spec's A range
      // and clamp onto the undamped stable interval.
      for (std::size_t i = 0; i < config.state_dim; ++i) {
        Rng local = osc_rng.fork(i);
        blk.a_bar[i] = clamp_stable_a(local.uniform(init.a_min, init.a_max), 0.0, dt[i]);
      }
    }
  }
  return w;
}

std::vector<DiscreteSystem> build_systems(const ModelConfig& config, const Weights& w) {
  config.validate();
  std::vector<DiscreteSystem> systems;
  systems.reserve(config.num_blocks);
  for (const auto& blk : w.blocks) {
    UnconstrainedParams raw;
    raw.dt_bar = blk.dt_bar;
    raw.a_bar = blk.a_bar;
    raw.g_bar = blk.g_bar.empty() ? std::vector<double>(config.state_dim, 0.0) : blk.g_bar;
    Dynamics dyn = constrain(raw);
    OscillatorParams params;
    params.a = std::move(dyn.a);
    params.g = std::move(dyn.g);
    params.dt = std::move(dyn.dt);
    params.b = blk.b_in;
    params.c = blk.c_out;
    systems.push_back(discretize(config.variant, params));
  }
  return systems;
}

void forward_item(const ModelConfig& config, const Weights& w,
                  std::span<const DiscreteSystem> systems, const double* input,
                  std::size_t len, std::size_t max_len, double* out, ForwardCache& cache) {
  const std::size_t h = config.hidden_dim, m = config.state_dim;
  const std::size_t p = config.input_dim, pe = config.encoder_in(), q = config.output_dim;

  // encoder input, with the normalized time channel appended when requested
  cache.input.resize(len * pe);
  double* enc_in = cache.input.data();
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t j = 0; j < p; ++j) enc_in[k * pe + j] = input[k * p + j];
    if (config.include_time)
      enc_in[k * pe + p] = len > 1 ? static_cast<double>(k) / static_cast<double>(len - 1) : 0.0;
  }

  cache.streams.resize(config.num_blocks + 1);
  cache.blocks.resize(config.num_blocks);
  cache.offsets.resize(len * 2 * m);
  cache.streams[0].resize(len * h);
  {
    double* stream = cache.streams[0].data();
    for (std::size_t k = 0; k < len; ++k) {
      matvec(w.enc_w, enc_in + k * pe, stream + k * h);
      for (std::size_t j = 0; j < h; ++j) stream[k * h + j] += w.enc_b[j];
    }
  }

  std::vector<double> act(h);
  double* act_ptr = act.data();

  for (std::size_t b = 0; b < config.num_blocks; ++b) {
    const BlockWeights& blk = w.blocks[b];
    const DiscreteSystem& sys = systems[b];
    BlockCache& bc = cache.blocks[b];
    const double* stream = cache.streams[b].data();
    cache.streams[b + 1].resize(len * h);
    double* stream_out = cache.streams[b + 1].data();

    bc.proj.resize(len * m);
    bc.states.resize(len * 2 * m);
    bc.ssm_out.resize(len * h);
    for (std::size_t k = 0; k < len; ++k) {
      double* pk = bc.proj.data() + k * m;
      matvec(sys.b, stream + k * h, pk);
      double* off = cache.offsets.data() + k * 2 * m;
      for (std::size_t i = 0; i < m; ++i) {
        off[i] = sys.f1[i] * pk[i];
        off[m + i] = sys.f2[i] * pk[i];
      }
    }
    scan_lti(sys.m11, sys.m12, sys.m21, sys.m22, cache.offsets, len, ScanMode::Parallel,
             bc.states, &cache.scan_ws);
    for (std::size_t k = 0; k < len; ++k) {
      double* so = bc.ssm_out.data() + k * h;
      matvec(sys.c, bc.states.data() + k * 2 * m + m, so);
      for (std::size_t j = 0; j < h; ++j) so[j] += blk.d_feed[j] * stream[k * h + j];
    }

    double finite_probe = 0.0;
    if (config.mixing == Mixing::Glu) {
      bc.pre_out.resize(len * h);
      bc.gate.resize(len * h);
      bc.gelu_cdf.resize(len * h);
      for (std::size_t k = 0; k < len; ++k) {
        const double* s = bc.ssm_out.data() + k * h;
        double* cdf = bc.gelu_cdf.data() + k * h;
        for (std::size_t j = 0; j < h; ++j) {
          cdf[j] = 0.5 * (1.0 + std::erf(s[j] * 0.7071067811865475244));
          act_ptr[j] = s[j] * cdf[j];
        }
        double* po = bc.pre_out.data() + k * h;
        double* gate = bc.gate.data() + k * h;
        matvec(blk.w_out, act_ptr, po);
        matvec(blk.w_gate, act_ptr, gate);
        double* so = stream_out + k * h;
        for (std::size_t j = 0; j < h; ++j) {
          po[j] += blk.b_out[j];
          gate[j] = sigmoid(gate[j] + blk.b_gate[j]);
          so[j] = (blk.skip ? stream[k * h + j] : 0.0) + po[j] * gate[j];
          finite_probe += so[j];
        }
      }
    } else {
      for (std::size_t k = 0; k < len; ++k) {
        double* so = stream_out + k * h;
        for (std::size_t j = 0; j < h; ++j) {
          so[j] = (blk.skip ? stream[k * h + j] : 0.0) + bc.ssm_out[k * h + j];
          finite_probe += so[j];
        }
      }
    }
    if (!std::isfinite(finite_probe))
      throw DivergedError("non-finite activation in block " + std::to_string(b));
  }

  const double* top = cache.streams[config.num_blocks].data();
  switch (config.readout) {
    case Readout::PerStep:
      for (std::size_t k = 0; k < len; ++k) {
        matvec(w.dec_w, top + k * h, out + k * q);
        for (std::size_t j = 0; j < q; ++j) out[k * q + j] += w.dec_b[j];
      }
      for (std::size_t k = len; k < max_len; ++k)
        for (std::size_t j = 0; j < q; ++j) out[k * q + j] = 0.0;
      break;
    case Readout::MeanPool: {
      std::vector<double> pooled(h, 0.0);
      for (std::size_t k = 0; k < len; ++k)
        for (std::size_t j = 0; j < h; ++j) pooled[j] += top[k * h + j];
      for (std::size_t j = 0; j < h; ++j) pooled[j] /= static_cast<double>(len);
      matvec(w.dec_w, pooled.data(), out);
      for (std::size_t j = 0; j < q; ++j) out[j] += w.dec_b[j];
      break;
    }
    case Readout::LastToken:
      matvec(w.dec_w, top + (len - 1) * h, out);
      for (std::size_t j = 0; j < q; ++j) out[j] += w.dec_b[j];
      break;
  }
}

std::vector<double> forward_with_systems(const ModelConfig& config, const Weights& w,
                                         std::span<const DiscreteSystem> systems,
                                         const SeqBatch& batch) {
  config.validate();
  batch.validate();
  if (batch.features != config.input_dim)
    throw ConfigError("batch features do not match the model input dimension");
  if (systems.size() != config.num_blocks)
    throw ConfigError("expected one discrete system per block");

  const std::size_t q = config.output_dim;
  const bool per_step = config.readout == Readout::PerStep;
  const std::size_t out_stride = per_step ? batch.max_len * q : q;
  std::vector<double> out(batch.items * out_stride, 0.0);
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_chunks(batch.items, [&](std::size_t lo, std::size_t hi) {
    ForwardCache cache;
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        forward_item(config, w, systems, batch.item(i), batch.lengths[i], batch.max_len,
                     out.data() + i * out_stride, cache);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  });
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> forward(const ModelConfig& config, const Weights& w, const SeqBatch& batch) {
  auto systems = build_systems(config, w);
  return forward_with_systems(config, w, systems, batch);
}

}  // namespace dlinoss
