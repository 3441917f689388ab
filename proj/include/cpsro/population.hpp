#pragma once

#include <filesystem>
#include <unordered_map>
#include <memory>
#include <string>
#include <vector>

#include "cpsro/nn.hpp"
#include "cpsro/policy.hpp"

namespace cpsro {

// One population member: a frozen policy, how it was created, and a sample
// of the decision points it visited while training (used for sub-policy
// selection).
struct PolicySnapshot {
  enum class Kind { kUniformRandom, kNet, kScripted, kTabular };

  Kind kind = Kind::kUniformRandom;
  std::shared_ptr<QNetwork> net;  // kNet only
  std::string script;             // kScripted only
  std::shared_ptr<std::unordered_map<std::string, std::vector<double>>> table;  // kTabular only
  std::string tag;
  int created_iteration = 0;
  std::vector<StateSample> state_buffer;

  static PolicySnapshot uniform_random(int iteration);
  static PolicySnapshot from_net(QNetwork net, std::string tag, int iteration,
                                 std::vector<StateSample> buffer);
  static PolicySnapshot scripted(std::string script_id, int iteration);
  static PolicySnapshot tabular(std::unordered_map<std::string, std::vector<double>> table,
                                std::string tag, int iteration);

  // Deep copy: a routing policy mutating its sub copies must never touch the
  // population's stored parameters.
  PolicySnapshot deep_copy() const;

  std::shared_ptr<const Policy> as_policy(int num_actions) const;
};

struct Population {
  std::vector<PolicySnapshot> members;

  int size() const { return static_cast<int>(members.size()); }
  std::vector<PolicyRef> policies(int num_actions) const;
};

void save_population(const std::filesystem::path& dir, const Population& pop, int player);
Population load_population(const std::filesystem::path& dir, int player);

}  // namespace cpsro
