#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dlinoss/model.hpp"
#include "dlinoss/tasks.hpp"

namespace dlinoss {

enum class LossKind { Mse, CrossEntropy };
enum class MetricKind { Mse, Rmse, Accuracy };

std::string metric_name(MetricKind m);
MetricKind metric_from_name(const std::string& name);

// Mean squared error over all valid scalar elements (per-step targets are
// masked by sequence length).
double mse(std::span<const double> outputs, const SeqBatch& batch, const TargetBatch& targets);
double rmse(std::span<const double> outputs, const SeqBatch& batch, const TargetBatch& targets);
// Fraction of items whose argmax logit equals the label.
double accuracy(std::span<const double> outputs, const SeqBatch& batch,
                const TargetBatch& targets);

// Scalar loss and exact reverse-mode gradients of every trainable scalar,
// including the oscillator triples through the stability activations and the
// discretization formulas. grads has the same shape as the weights.
struct LossGrads {
  double loss = 0.0;
  Weights grads;
};
LossGrads loss_and_gradients(const ModelConfig& config, const Weights& w, const SeqBatch& batch,
                             const TargetBatch& targets, LossKind loss);

// Visits every tensor of a weight container in a fixed order.
template <typename W, typename Fn>
void for_each_tensor(W& w, Fn&& fn) {
  fn(w.enc_w.a);
  fn(w.enc_b);
  for (auto& blk : w.blocks) {
    fn(blk.dt_bar);
    fn(blk.a_bar);
    if (!blk.g_bar.empty()) fn(blk.g_bar);
    fn(blk.b_in.a);
    fn(blk.c_out.a);
    fn(blk.d_feed);
    fn(blk.w_out.a);
    fn(blk.w_gate.a);
    fn(blk.b_out);
    fn(blk.b_gate);
  }
  fn(w.dec_w.a);
  fn(w.dec_b);
}

// Adam with constant learning rate and bias correction.
class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Weights& w, const Weights& grads);
  std::size_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainOptions {
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_steps = 1000;
  std::size_t eval_every = 100;
  std::size_t patience = 1000;  // eval steps without val improvement; 0 disables
  LossKind loss = LossKind::Mse;
  MetricKind val_metric = MetricKind::Mse;
  MetricKind test_metric = MetricKind::Rmse;
  double target_val = std::numeric_limits<double>::quiet_NaN();  // threshold tracking
  bool stop_at_target = false;
  std::size_t eval_batch = 64;
  std::uint64_t seed = 0;
};

struct MetricRow {
  std::size_t step = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
  double wall_ms = 0.0;
};

enum class RunStatus { Ok, Diverged };
std::string run_status_name(RunStatus s);

inline constexpr std::size_t kNeverReached = static_cast<std::size_t>(-1);

struct TrainOutcome {
  RunStatus status = RunStatus::Ok;
  std::vector<MetricRow> history;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_step = 0;
  std::size_t steps_to_threshold = kNeverReached;
  double test_metric = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps_run = 0;
  double wall_ms_total = 0.0;
  Weights best_weights;
};

// Deterministic given (config, init, data, options): shuffling, init and
// batching all derive from options.seed. Evaluates the val metric every
// eval_every steps, keeps the best-by-val weights, early-stops on patience,
// and reports the test metric of the best weights.
TrainOutcome train_loop(const ModelConfig& config, const InitSpec& init, const Dataset& data,
                        const TrainOptions& options);

// Metric of a full dataset split under the given weights.
double evaluate_split(const ModelConfig& config, const Weights& w, const Dataset& data,
                      std::span<const std::size_t> indices, MetricKind metric,
                      std::size_t eval_batch);

}  // namespace dlinoss
