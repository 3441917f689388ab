#include "cpsro/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "cpsro/error.hpp"

namespace cpsro {

namespace {

// Forward pass keeping post-activation values per layer for backprop.
void forward_layers(const QNetwork& net, std::span<const double> x,
                    std::vector<std::vector<double>>& activations) {
  activations.assign(net.num_layers() + 1, {});
  activations[0].assign(x.begin(), x.end());
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    const int fan_in = net.widths[layer];
    const int fan_out = net.widths[layer + 1];
    const auto& w = net.weights[layer];
    const auto& prev = activations[layer];
    auto& out = activations[layer + 1];
    out.resize(fan_out);
    const bool hidden = layer + 1 < net.num_layers();
    for (int row = 0; row < fan_out; ++row) {
      double sum = net.biases[layer][row];
      const double* wrow = w.data() + static_cast<size_t>(row) * fan_in;
      for (int col = 0; col < fan_in; ++col) sum += wrow[col] * prev[col];
      out[row] = hidden && sum < 0.0 ? 0.0 : sum;
    }
  }
}

}  // namespace

std::vector<double> QNetwork::forward(std::span<const double> x) const {
  CPSRO_CHECK(static_cast<int>(x.size()) == input_size(), "forward: input size mismatch");
  std::vector<std::vector<double>> activations;
  forward_layers(*this, x, activations);
  return activations.back();
}

QNetwork make_network(const std::vector<int>& widths, Rng& rng) {
  CPSRO_CHECK(widths.size() >= 2, "make_network: need at least input and output widths");
  QNetwork net;
  net.widths = widths;
  for (size_t layer = 0; layer + 1 < widths.size(); ++layer) {
    const int fan_in = widths[layer];
    const int fan_out = widths[layer + 1];
    CPSRO_CHECK(fan_in > 0 && fan_out > 0, "make_network: widths must be positive");
    const double limit = std::sqrt(6.0 / fan_in);
    std::vector<double> w(static_cast<size_t>(fan_out) * fan_in);
    for (auto& v : w) v = (2.0 * rng.uniform() - 1.0) * limit;
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const auto& block : weights)
    for (double g : block) sq += g * g;
  for (const auto& block : biases)
    for (double g : block) sq += g * g;
  return std::sqrt(sq);
}

namespace {

// Backprop one sample's output delta into the accumulated gradients;
// activations must come from forward_layers on the same input.
void backprop_sample(const QNetwork& net, const std::vector<std::vector<double>>& activations,
                     std::vector<double> delta, Gradients& grads) {
  std::vector<double> delta_prev;
  for (int layer = net.num_layers() - 1; layer >= 0; --layer) {
    const int fan_in = net.widths[layer];
    const int fan_out = net.widths[layer + 1];
    const auto& prev = activations[layer];
    auto& gw = grads.weights[layer];
    auto& gb = grads.biases[layer];
    for (int row = 0; row < fan_out; ++row) {
      const double d = delta[row];
      if (d == 0.0) continue;
      gb[row] += d;
      double* grow = gw.data() + static_cast<size_t>(row) * fan_in;
      for (int col = 0; col < fan_in; ++col) grow[col] += d * prev[col];
    }
    if (layer == 0) break;
    delta_prev.assign(fan_in, 0.0);
    const auto& w = net.weights[layer];
    for (int row = 0; row < fan_out; ++row) {
      const double d = delta[row];
      if (d == 0.0) continue;
      const double* wrow = w.data() + static_cast<size_t>(row) * fan_in;
      for (int col = 0; col < fan_in; ++col) delta_prev[col] += d * wrow[col];
    }
    // ReLU mask: prev layer is hidden, so zero activation means the unit was
    // clamped and passes no gradient.
    for (int col = 0; col < fan_in; ++col) {
      if (prev[col] <= 0.0) delta_prev[col] = 0.0;
    }
    delta.swap(delta_prev);
  }
}

Gradients zero_gradients(const QNetwork& net) {
  Gradients grads;
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    grads.weights.emplace_back(net.weights[layer].size(), 0.0);
    grads.biases.emplace_back(net.biases[layer].size(), 0.0);
  }
  return grads;
}

}  // namespace

Gradients gradient(const QNetwork& net, std::span<const TdSample> batch,
                   std::span<const double> sample_weights, std::vector<double>* td_errors) {
  CPSRO_CHECK(!batch.empty(), "gradient: empty batch");
  CPSRO_CHECK(sample_weights.empty() || sample_weights.size() == batch.size(),
              "gradient: weight count mismatch");
  Gradients grads = zero_gradients(net);
  if (td_errors) td_errors->assign(batch.size(), 0.0);

  std::vector<std::vector<double>> activations;
  std::vector<double> delta;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  for (size_t s = 0; s < batch.size(); ++s) {
    const TdSample& sample = batch[s];
    if (!std::isfinite(sample.td_target)) throw NumericError("gradient: non-finite TD target");
    forward_layers(net, sample.features, activations);
    const auto& q = activations.back();
    CPSRO_CHECK(sample.action >= 0 && sample.action < static_cast<int>(q.size()),
                "gradient: action index out of range");
    const double err = q[sample.action] - sample.td_target;
    if (td_errors) (*td_errors)[s] = err;
    const double w_s = sample_weights.empty() ? 1.0 : sample_weights[s];

    // d(mean_i w_i err_i^2)/dq[a] = 2 w err / B
    delta.assign(q.size(), 0.0);
    delta[sample.action] = 2.0 * w_s * err * inv_batch;
    backprop_sample(net, activations, delta, grads);
  }
  return grads;
}

Gradients gradient_from_output_deltas(const QNetwork& net, std::span<const DeltaSample> batch) {
  CPSRO_CHECK(!batch.empty(), "gradient_from_output_deltas: empty batch");
  Gradients grads = zero_gradients(net);
  std::vector<std::vector<double>> activations;
  for (const auto& sample : batch) {
    CPSRO_CHECK(static_cast<int>(sample.output_delta.size()) == net.output_size(),
                "gradient_from_output_deltas: delta size mismatch");
    forward_layers(net, sample.features, activations);
    backprop_sample(net, activations,
                    std::vector<double>(sample.output_delta.begin(), sample.output_delta.end()),
                    grads);
  }
  return grads;
}

void add_scaled(Gradients& into, const Gradients& g, double scale) {
  for (size_t layer = 0; layer < into.weights.size(); ++layer) {
    for (size_t i = 0; i < into.weights[layer].size(); ++i) {
      into.weights[layer][i] += scale * g.weights[layer][i];
    }
    for (size_t i = 0; i < into.biases[layer].size(); ++i) {
      into.biases[layer][i] += scale * g.biases[layer][i];
    }
  }
}

std::vector<double> softmax_kl_output_delta(std::span<const double> q,
                                            std::span<const uint8_t> legal,
                                            std::span<const double> target, double tau) {
  CPSRO_CHECK(tau > 0.0, "softmax_kl_output_delta: temperature must be positive");
  CPSRO_CHECK(q.size() == legal.size() && q.size() == target.size(),
              "softmax_kl_output_delta: size mismatch");
  // p = softmax(q/tau) over legal; L = sum_a p_a ln(p_a/t_a);
  // dL/dq_b = p_b (ln(p_b/t_b) - L) / tau.
  double max_q = -std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < q.size(); ++a) {
    if (legal[a]) max_q = std::max(max_q, q[a]);
  }
  std::vector<double> p(q.size(), 0.0);
  double total = 0.0;
  for (size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    p[a] = std::exp((q[a] - max_q) / tau);
    total += p[a];
  }
  CPSRO_CHECK(total > 0.0, "softmax_kl_output_delta: empty legal mask");
  double kl = 0.0;
  std::vector<double> log_ratio(q.size(), 0.0);
  for (size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    p[a] /= total;
    CPSRO_CHECK(target[a] > 0.0, "softmax_kl_output_delta: target lacks support");
    log_ratio[a] = std::log(p[a] / target[a]);
    kl += p[a] * log_ratio[a];
  }
  std::vector<double> delta(q.size(), 0.0);
  for (size_t a = 0; a < q.size(); ++a) {
    if (legal[a]) delta[a] = p[a] * (log_ratio[a] - kl) / tau;
  }
  return delta;
}

AdamState make_adam(const QNetwork& net, double lr, int64_t lr_decay_steps) {
  AdamState state;
  state.lr = lr;
  state.lr_decay_steps = lr_decay_steps;
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    state.m_w.emplace_back(net.weights[layer].size(), 0.0);
    state.v_w.emplace_back(net.weights[layer].size(), 0.0);
    state.m_b.emplace_back(net.biases[layer].size(), 0.0);
    state.v_b.emplace_back(net.biases[layer].size(), 0.0);
  }
  return state;
}

void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double clip_bound) {
  double scale = 1.0;
  if (clip_bound > 0.0) {
    const double norm = grads.global_norm();
    if (norm > clip_bound) scale = clip_bound / norm;
  }
  state.step++;
  double lr = state.lr;
  if (state.lr_decay_steps > 0) {
    lr *= std::max(0.0, 1.0 - static_cast<double>(state.step) / state.lr_decay_steps);
  }
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (size_t i = 0; i < params.size(); ++i) {
      const double gi = g[i] * scale;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + state.eps);
    }
  };
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    update(net.weights[layer], grads.weights[layer], state.m_w[layer], state.v_w[layer]);
    update(net.biases[layer], grads.biases[layer], state.m_b[layer], state.v_b[layer]);
  }
}

Action masked_argmax(std::span<const double> q, std::span<const uint8_t> legal) {
  CPSRO_CHECK(q.size() == legal.size(), "masked_argmax: mask size mismatch");
  int best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < q.size(); ++a) {
    if (legal[a] && q[a] > best_q) {
      best_q = q[a];
      best = static_cast<int>(a);
    }
  }
  CPSRO_CHECK(best >= 0, "masked_argmax: empty legal mask");
  return best;
}

Action act_epsilon_greedy(const QNetwork& net, std::span<const double> x,
                          std::span<const uint8_t> legal, double epsilon, Rng& rng) {
  int num_legal = 0;
  for (uint8_t bit : legal) num_legal += bit ? 1 : 0;
  CPSRO_CHECK(num_legal > 0, "act_epsilon_greedy: empty legal mask");
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    int pick = rng.uniform_int(num_legal);
    for (size_t a = 0; a < legal.size(); ++a) {
      if (legal[a] && pick-- == 0) return static_cast<int>(a);
    }
  }
  return masked_argmax(net.forward(x), legal);
}

std::vector<double> boltzmann_from_values(std::span<const double> q,
                                          std::span<const uint8_t> legal, double tau) {
  CPSRO_CHECK(tau > 0.0, "boltzmann_from_values: temperature must be positive");
  CPSRO_CHECK(q.size() == legal.size(), "boltzmann_from_values: mask size mismatch");
  int num_legal = 0;
  double max_q = -std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    num_legal++;
    max_q = std::max(max_q, q[a]);
  }
  CPSRO_CHECK(num_legal > 0, "boltzmann_from_values: empty legal mask");
  std::vector<double> p(q.size(), 0.0);
  double total = 0.0;
  for (size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    p[a] = std::exp((q[a] - max_q) / tau);
    total += p[a];
  }
  const double uniform = 1.0 / num_legal;
  for (size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    p[a] = (1.0 - kDistributionFloor) * (p[a] / total) + kDistributionFloor * uniform;
  }
  return p;
}

std::vector<double> policy_distribution(const QNetwork& net, std::span<const double> x,
                                        std::span<const uint8_t> legal, double tau) {
  return boltzmann_from_values(net.forward(x), legal, tau);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  CPSRO_CHECK(p.size() == q.size(), "kl_divergence: size mismatch");
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    CPSRO_CHECK(q[i] > 0.0, "kl_divergence: q has zero mass where p is positive");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

namespace {

constexpr char kMagic[4] = {'C', 'P', 'Q', 'N'};
constexpr uint32_t kFormatVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

uint32_t read_u32(std::ifstream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64_array(std::ofstream& out, const std::vector<double>& vals) {
  for (double v : vals) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
}

void read_f64_array(std::ifstream& in, std::vector<double>& vals) {
  for (double& v : vals) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(buf[i]) << (8 * i);
    std::memcpy(&v, &bits, 8);
  }
}

}  // namespace

void save_network(const QNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("save_network: cannot open " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<uint32_t>(net.widths.size()));
  for (int w : net.widths) write_u32(out, static_cast<uint32_t>(w));
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    write_f64_array(out, net.weights[layer]);
    write_f64_array(out, net.biases[layer]);
  }
  if (!out) throw ConfigError("save_network: write failed for " + path.string());
}

QNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_network: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ConfigError("load_network: bad magic in " + path.string());
  }
  const uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw ConfigError("load_network: unsupported blob version " + std::to_string(version));
  }
  QNetwork net;
  const uint32_t num_widths = read_u32(in);
  if (num_widths < 2 || num_widths > 64) throw ConfigError("load_network: corrupt width header");
  net.widths.resize(num_widths);
  for (auto& w : net.widths) w = static_cast<int>(read_u32(in));
  for (int layer = 0; layer < net.num_layers(); ++layer) {
    net.weights.emplace_back(static_cast<size_t>(net.widths[layer]) * net.widths[layer + 1]);
    net.biases.emplace_back(net.widths[layer + 1]);
    read_f64_array(in, net.weights[layer]);
    read_f64_array(in, net.biases[layer]);
  }
  if (!in) throw ConfigError("load_network: truncated blob " + path.string());
  return net;
}

}  // namespace cpsro
