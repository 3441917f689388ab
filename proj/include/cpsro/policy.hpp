#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpsro/game.hpp"
#include "cpsro/nn.hpp"
#include "cpsro/rng.hpp"

namespace cpsro {

// A decision point detached from the live game tree: enough to query any
// policy (key for tabular/scripted, features for networks) plus the legal
// mask needed to keep distributions off illegal actions.
struct StateSample {
  std::string key;
  std::vector<double> features;
  std::vector<uint8_t> legal;
};

StateSample make_sample(const State& state, int player, int num_actions);

class Policy;
using PolicyRef = std::shared_ptr<const Policy>;

// Deployable policy. deployment_distribution is what the policy actually
// plays (one-hot for greedy networks); distribution is the smoothed
// Boltzmann realization used by KL terms.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const StateSample& s, Rng& rng) const;
  virtual std::vector<double> deployment_distribution(const StateSample& s) const = 0;
  virtual std::vector<double> distribution(const StateSample& s, double tau) const = 0;
};

class NetPolicy final : public Policy {
 public:
  explicit NetPolicy(std::shared_ptr<const QNetwork> net) : net_(std::move(net)) {}
  Action act(const StateSample& s, Rng& rng) const override;
  std::vector<double> deployment_distribution(const StateSample& s) const override;
  std::vector<double> distribution(const StateSample& s, double tau) const override;
  const QNetwork& net() const { return *net_; }

 private:
  std::shared_ptr<const QNetwork> net_;
};

class UniformRandomPolicy final : public Policy {
 public:
  Action act(const StateSample& s, Rng& rng) const override;
  std::vector<double> deployment_distribution(const StateSample& s) const override;
  std::vector<double> distribution(const StateSample& s, double tau) const override;
};

// Explicit per-key action distributions; unknown keys fall back to uniform
// over the legal mask. Used for hand-built strategies and best responses.
class TabularPolicy final : public Policy {
 public:
  TabularPolicy() = default;
  explicit TabularPolicy(std::unordered_map<std::string, std::vector<double>> table)
      : table_(std::move(table)) {}
  Action act(const StateSample& s, Rng& rng) const override;
  std::vector<double> deployment_distribution(const StateSample& s) const override;
  std::vector<double> distribution(const StateSample& s, double tau) const override;

  void set(const std::string& key, std::vector<double> dist) { table_[key] = std::move(dist); }
  const std::unordered_map<std::string, std::vector<double>>& table() const { return table_; }

 private:
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Deterministic fixture policy identified by a script id (maze pi1/pi2/pi3/
// switch/monster).
class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::string script_id, int num_actions)
      : script_(std::move(script_id)), num_actions_(num_actions) {}
  Action act(const StateSample& s, Rng& rng) const override;
  std::vector<double> deployment_distribution(const StateSample& s) const override;
  std::vector<double> distribution(const StateSample& s, double tau) const override;
  const std::string& script() const { return script_; }

 private:
  std::string script_;
  int num_actions_ = 0;
};

std::vector<double> uniform_over_legal(std::span<const uint8_t> legal);
std::vector<double> one_hot(Action action, size_t size);

}  // namespace cpsro
