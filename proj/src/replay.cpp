#include "cpsro/replay.hpp"

#include <algorithm>
#include <cmath>

#include "cpsro/error.hpp"

namespace cpsro {

ReplayBuffer::ReplayBuffer(int capacity, bool prioritized, double alpha, double beta)
    : capacity_(capacity), prioritized_(prioritized), alpha_(alpha), beta_(beta) {
  CPSRO_CHECK(capacity > 0, "ReplayBuffer: capacity must be positive");
  storage_.resize(capacity);
  if (prioritized_) {
    while (leaf_base_ < capacity_) leaf_base_ <<= 1;
    tree_.assign(2 * leaf_base_, 0.0);
  }
}

void ReplayBuffer::set_priority(int index, double priority) {
  int node = leaf_base_ + index;
  tree_[node] = priority;
  for (node >>= 1; node >= 1; node >>= 1) {
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }
}

int ReplayBuffer::tree_sample(double mass) const {
  int node = 1;
  while (node < leaf_base_) {
    if (mass <= tree_[2 * node] || tree_[2 * node + 1] <= 0.0) {
      node = 2 * node;
    } else {
      mass -= tree_[2 * node];
      node = 2 * node + 1;
    }
  }
  return node - leaf_base_;
}

void ReplayBuffer::push(Transition t) {
  storage_[head_] = std::move(t);
  if (prioritized_) set_priority(head_, std::pow(max_priority_, alpha_));
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

SampledBatch ReplayBuffer::sample(int batch_size, Rng& rng) const {
  CPSRO_CHECK(size_ >= batch_size, "ReplayBuffer::sample: underfull buffer");
  SampledBatch batch;
  batch.indices.reserve(batch_size);
  batch.is_weights.assign(batch_size, 1.0);
  if (!prioritized_) {
    for (int i = 0; i < batch_size; ++i) batch.indices.push_back(rng.uniform_int(size_));
    return batch;
  }
  const double total = tree_total();
  CPSRO_CHECK(total > 0.0, "ReplayBuffer::sample: empty priority mass");
  double max_w = 0.0;
  for (int i = 0; i < batch_size; ++i) {
    const int index = tree_sample(rng.uniform() * total);
    batch.indices.push_back(index);
    const double prob = tree_[leaf_base_ + index] / total;
    const double w = std::pow(static_cast<double>(size_) * prob, -beta_);
    batch.is_weights[i] = w;
    max_w = std::max(max_w, w);
  }
  for (double& w : batch.is_weights) w /= max_w;
  return batch;
}

void ReplayBuffer::update_priorities(const std::vector<int>& indices,
                                     const std::vector<double>& td_errors) {
  if (!prioritized_) return;
  CPSRO_CHECK(indices.size() == td_errors.size(), "update_priorities: size mismatch");
  for (size_t i = 0; i < indices.size(); ++i) {
    const double priority = std::abs(td_errors[i]) + 1e-6;
    max_priority_ = std::max(max_priority_, priority);
    set_priority(indices[i], std::pow(priority, alpha_));
  }
}

}  // namespace cpsro
