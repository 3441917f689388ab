#pragma once

#include <cstdint>
#include <vector>

#include "cpsro/nn.hpp"
#include "cpsro/rng.hpp"

namespace cpsro {

struct Transition {
  std::vector<double> features;
  Action action = 0;
  double reward = 0.0;
  std::vector<double> next_features;
  std::vector<uint8_t> next_legal;
  bool terminal = false;
  std::vector<uint8_t> legal;        // mask at the decision state
  std::vector<double> aux_target;    // optional distribution target at s
};

struct SampledBatch {
  std::vector<int> indices;
  std::vector<double> is_weights;  // all ones when sampling uniformly
};

// Ring buffer of transitions. With prioritization enabled, sampling follows
// priority^alpha through a sum tree and returns importance-sampling weights
// (N * P)^-beta normalized by the batch maximum.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, bool prioritized, double alpha = 0.6, double beta = 0.4);

  void push(Transition t);
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  const Transition& at(int index) const { return storage_[index]; }

  SampledBatch sample(int batch_size, Rng& rng) const;
  void update_priorities(const std::vector<int>& indices, const std::vector<double>& td_errors);

 private:
  void set_priority(int index, double priority);
  double tree_total() const { return tree_[1]; }
  int tree_sample(double mass) const;

  int capacity_;
  bool prioritized_;
  double alpha_, beta_;
  int size_ = 0;
  int head_ = 0;
  double max_priority_ = 1.0;
  std::vector<Transition> storage_;
  std::vector<double> tree_;  // 1-based segment tree over capacity leaves
  int leaf_base_ = 1;
};

}  // namespace cpsro
