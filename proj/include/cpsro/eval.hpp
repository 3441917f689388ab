#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpsro/dqn.hpp"
#include "cpsro/game.hpp"
#include "cpsro/learning.hpp"
#include "cpsro/meta.hpp"

namespace cpsro {

// Per-infoset action distributions over the global action space. Infosets
// missing from the map default to uniform over legal actions.
using Behavioral = std::unordered_map<std::string, std::vector<double>>;

inline constexpr int64_t kDefaultNodeCap = 10000000;

// How population policies are realized when evaluated: what they actually
// deploy (greedy one-hot for networks), or the smoothed Boltzmann form used
// by KL-consistent analysis.
enum class Realization { kGreedy, kSmoothed };

struct MixedProfile {
  std::array<std::vector<PolicyRef>, 2> policies;
  std::array<MetaStrategy, 2> sigma;
};

struct ExploitabilityReport {
  double value = 0.0;
  bool approximate = false;
  std::array<double, 2> br_values = {0.0, 0.0};
};

struct BestResponse {
  double value = 0.0;
  Behavioral strategy;
};

struct Utility {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Reach-weighted reduction of a policy mixture to one behavioral strategy
// (Kuhn's theorem direction). Requires perfect recall.
Behavioral aggregate_behavioral(const Game& game, std::span<const PolicyRef> policies,
                                std::span<const double> sigma, int player,
                                Realization realization = Realization::kGreedy, double tau = 1.0,
                                int64_t node_cap = kDefaultNodeCap);

// Exact best-response value and strategy against a fixed opponent behavioral
// strategy, by two-pass traversal (opponent+chance reach accumulation, then
// per-infoset argmax on counterfactual values).
BestResponse best_response_value(const Game& game, const Behavioral& opponent, int player,
                                 int64_t node_cap = kDefaultNodeCap);

// Sum of both players' best-response values against the profile.
ExploitabilityReport exploitability(const Game& game, const MixedProfile& profile,
                                    Realization realization = Realization::kGreedy,
                                    double tau = 1.0, int64_t node_cap = kDefaultNodeCap);
ExploitabilityReport exploitability_behavioral(const Game& game, const Behavioral& b0,
                                               const Behavioral& b1,
                                               int64_t node_cap = kDefaultNodeCap);

// Trains one DQN exploiter per player against the frozen profile, then
// reports the sum of their mean evaluation utilities (1000 greedy episodes).
ExploitabilityReport approx_exploitability(const Game& game, const MixedProfile& profile,
                                           const DqnHyper& hyper, int train_episodes,
                                           uint64_t seed, int eval_episodes = 1000);

// Exact expected player-0 value between two deployed policies.
double expected_value(const Game& game, const Policy& p0, const Policy& p1,
                      int64_t node_cap = kDefaultNodeCap);
double expected_value_behavioral(const Game& game, const Behavioral& b0, const Behavioral& b1,
                                 int64_t node_cap = kDefaultNodeCap);
// Exact expected value for `player` against an opponent mixture.
double expected_value_vs_mixture(const Game& game, const Policy& policy, int player,
                                 std::span<const PolicyRef> opponents,
                                 std::span<const double> sigma,
                                 int64_t node_cap = kDefaultNodeCap);

// Monte-Carlo utility of `policy` (player i) against the opponent mixture,
// both sides deployed greedily.
Utility head_to_head(const Game& game, const Policy& policy, int player,
                     std::span<const PolicyRef> opponents, std::span<const double> sigma,
                     int episodes, Rng& rng);

}  // namespace cpsro
