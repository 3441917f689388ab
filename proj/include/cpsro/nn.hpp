#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cpsro/rng.hpp"

namespace cpsro {

using Action = int;

// Fully connected ReLU network with an identity output layer, stored as
// per-layer row-major weight blocks. Values, not handles: copying a
// QNetwork snapshots its parameters.
struct QNetwork {
  std::vector<int> widths;                   // input, hidden..., output
  std::vector<std::vector<double>> weights;  // [layer][row * fan_in + col]
  std::vector<std::vector<double>> biases;   // [layer][row]

  int input_size() const { return widths.front(); }
  int output_size() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }

  std::vector<double> forward(std::span<const double> x) const;
};

// He-style uniform fan-in initialization, seed-controlled.
QNetwork make_network(const std::vector<int>& widths, Rng& rng);

struct Gradients {
  std::vector<std::vector<double>> weights, biases;
  double global_norm() const;
};

struct TdSample {
  std::span<const double> features;
  int action;
  double td_target;
};

// Gradient of the mean squared TD error over the batch, optionally with
// per-sample weights (importance sampling). td_errors, when given, receives
// q(x)[action] - target per sample.
Gradients gradient(const QNetwork& net, std::span<const TdSample> batch,
                   std::span<const double> sample_weights = {},
                   std::vector<double>* td_errors = nullptr);

// Backprop of caller-supplied dL/doutput vectors (losses defined on the
// network outputs directly, e.g. a softmax KL toward a target distribution).
struct DeltaSample {
  std::span<const double> features;
  std::span<const double> output_delta;
};
Gradients gradient_from_output_deltas(const QNetwork& net, std::span<const DeltaSample> batch);
void add_scaled(Gradients& into, const Gradients& g, double scale);

// dL/dq for L = KL(softmax(q/tau) over legal || target); zero on illegal
// entries.
std::vector<double> softmax_kl_output_delta(std::span<const double> q,
                                            std::span<const uint8_t> legal,
                                            std::span<const double> target, double tau);

struct AdamState {
  double lr = 5e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t lr_decay_steps = 0;  // 0 disables the linear decay schedule
  int64_t step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
};

AdamState make_adam(const QNetwork& net, double lr, int64_t lr_decay_steps = 0);

// Standard Adam update with bias correction. A positive clip bound rescales
// the gradient to that global norm first.
void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double clip_bound = 0.0);

// Epsilon-greedy action over the legal mask; greedy ties break to the lowest
// index and illegal entries are treated as -inf.
Action act_epsilon_greedy(const QNetwork& net, std::span<const double> x,
                          std::span<const uint8_t> legal, double epsilon, Rng& rng);

Action masked_argmax(std::span<const double> q, std::span<const uint8_t> legal);

// Boltzmann distribution over legal actions at temperature tau, mixed with a
// uniform floor of total weight 1e-3 so downstream KL terms stay finite.
std::vector<double> policy_distribution(const QNetwork& net, std::span<const double> x,
                                        std::span<const uint8_t> legal, double tau);
std::vector<double> boltzmann_from_values(std::span<const double> q,
                                          std::span<const uint8_t> legal, double tau);

inline constexpr double kDistributionFloor = 1e-3;

double kl_divergence(std::span<const double> p, std::span<const double> q);

// Versioned binary parameter blob: "CPQN" magic, format version, layer
// widths, then the little-endian float64 weight and bias arrays per layer.
void save_network(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_network(const std::filesystem::path& path);

}  // namespace cpsro
