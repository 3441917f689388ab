#include "cpsro/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "cpsro/error.hpp"

namespace cpsro {

void DqnHyper::validate() const {
  if (hidden.empty()) throw ConfigError("dqn: need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("dqn: hidden widths must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("dqn: gamma outside [0,1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("dqn: epsilon outside [0,1]");
  if (lr <= 0.0) throw ConfigError("dqn: learning rate must be positive");
  if (batch_size <= 0) throw ConfigError("dqn: batch size must be positive");
  if (buffer_capacity < batch_size) throw ConfigError("dqn: buffer smaller than batch");
  if (target_update_freq <= 0) throw ConfigError("dqn: target update frequency must be positive");
  if (soft_tau < 0.0 || soft_tau > 1.0) throw ConfigError("dqn: soft update ratio outside [0,1]");
  if (grad_clip < 0.0) throw ConfigError("dqn: gradient clip must be non-negative");
  if (train_every <= 0) throw ConfigError("dqn: train_every must be positive");
  if (kl_temperature <= 0.0) throw ConfigError("dqn: KL temperature must be positive");
  if (per_alpha < 0.0 || per_beta < 0.0) throw ConfigError("dqn: PER exponents must be >= 0");
}

DqnLearner::DqnLearner(int input_size, int output_size, const DqnHyper& hyper, Rng& rng)
    : hyper_(hyper),
      net_([&] {
        std::vector<int> widths;
        widths.push_back(input_size);
        for (int h : hyper.hidden) widths.push_back(h);
        widths.push_back(output_size);
        return make_network(widths, rng);
      }()),
      target_(net_),
      adam_(make_adam(net_, hyper.lr, hyper.lr_decay_steps)),
      buffer_(hyper.buffer_capacity, hyper.prioritized, hyper.per_alpha, hyper.per_beta) {
  hyper_.validate();
}

std::optional<double> DqnLearner::observe(Transition t, Rng& rng) {
  buffer_.push(std::move(t));
  observed_++;
  if (observed_ % hyper_.train_every != 0) return std::nullopt;
  return train_step(rng);
}

std::optional<double> DqnLearner::train_step(Rng& rng) {
  const int min_fill = std::max(hyper_.batch_size, hyper_.min_buffer);
  if (buffer_.size() < min_fill) return std::nullopt;

  const SampledBatch batch = buffer_.sample(hyper_.batch_size, rng);
  std::vector<TdSample> samples;
  std::vector<double> targets(batch.indices.size());
  samples.reserve(batch.indices.size());
  for (size_t i = 0; i < batch.indices.size(); ++i) {
    const Transition& t = buffer_.at(batch.indices[i]);
    double target = t.reward;
    if (!t.terminal) {
      const auto next_q = target_.forward(t.next_features);
      target += hyper_.gamma * next_q[masked_argmax(next_q, t.next_legal)];
    }
    targets[i] = target;
    samples.push_back({t.features, t.action, target});
  }

  std::vector<double> td_errors;
  Gradients grads = gradient(net_, samples, batch.is_weights, &td_errors);
  if (aux_) {
    std::vector<const Transition*> batch_ptrs;
    batch_ptrs.reserve(batch.indices.size());
    for (int index : batch.indices) batch_ptrs.push_back(&buffer_.at(index));
    aux_(net_, batch_ptrs, grads);
  }
  adam_step(net_, grads, adam_, hyper_.grad_clip);
  buffer_.update_priorities(batch.indices, td_errors);
  train_steps_++;

  if (train_steps_ % hyper_.target_update_freq == 0) {
    if (hyper_.soft_tau > 0.0) {
      for (int layer = 0; layer < net_.num_layers(); ++layer) {
        for (size_t i = 0; i < net_.weights[layer].size(); ++i) {
          target_.weights[layer][i] +=
              hyper_.soft_tau * (net_.weights[layer][i] - target_.weights[layer][i]);
        }
        for (size_t i = 0; i < net_.biases[layer].size(); ++i) {
          target_.biases[layer][i] +=
              hyper_.soft_tau * (net_.biases[layer][i] - target_.biases[layer][i]);
        }
      }
    } else {
      target_ = net_;
    }
  }

  double loss = 0.0;
  for (size_t i = 0; i < td_errors.size(); ++i) {
    loss += batch.is_weights[i] * td_errors[i] * td_errors[i];
  }
  return loss / static_cast<double>(td_errors.size());
}

}  // namespace cpsro
