#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "cpsro/nn.hpp"
#include "cpsro/replay.hpp"
#include "cpsro/rng.hpp"

namespace cpsro {

struct DqnHyper {
  std::vector<int> hidden = {64, 64};
  double lr = 5e-3;
  int64_t lr_decay_steps = 0;
  double gamma = 1.0;
  double epsilon = 0.05;
  int batch_size = 32;
  int buffer_capacity = 10000;
  // Target network refresh cadence in train steps: a hard copy when
  // soft_tau == 0, otherwise the soft blend theta- += tau (theta - theta-).
  int target_update_freq = 100;
  double soft_tau = 0.0;
  double grad_clip = 0.0;
  bool prioritized = false;
  double per_alpha = 0.6;
  double per_beta = 0.4;
  int train_every = 1;
  int min_buffer = 0;  // 0 means batch_size
  double kl_temperature = 1.0;

  void validate() const;
};

// Extra gradient merged into every TD step, e.g. a distillation loss on the
// sampled batch. Accumulates into the third argument.
using AuxGradient =
    std::function<void(const QNetwork&, std::span<const Transition* const>, Gradients&)>;

// Single-agent DQN: value network, target copy, Adam state and replay
// buffer. All randomness flows through the caller's Rng.
class DqnLearner {
 public:
  DqnLearner(int input_size, int output_size, const DqnHyper& hyper, Rng& rng);

  void set_aux_gradient(AuxGradient aux) { aux_ = std::move(aux); }

  Action act(std::span<const double> features, std::span<const uint8_t> legal, Rng& rng) {
    return act_epsilon_greedy(net_, features, legal, hyper_.epsilon, rng);
  }

  // Stores the transition and trains on the train_every cadence. Returns the
  // loss when a train step ran.
  std::optional<double> observe(Transition t, Rng& rng);

  // One TD update from the buffer; no-op (nullopt) while underfull.
  std::optional<double> train_step(Rng& rng);

  const QNetwork& net() const { return net_; }
  QNetwork& mutable_net() { return net_; }
  const DqnHyper& hyper() const { return hyper_; }
  int64_t train_steps() const { return train_steps_; }

 private:
  DqnHyper hyper_;
  QNetwork net_, target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  int64_t observed_ = 0;
  int64_t train_steps_ = 0;
  AuxGradient aux_;
};

}  // namespace cpsro
