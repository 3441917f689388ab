#pragma once

#include <filesystem>
#include <optional>

#include "cpsro/dqn.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/population.hpp"

namespace cpsro {

struct ConfluxConfig {
  int start_iteration = 10;
  int interval = 2;
  int num_subs = 3;   // sub-policies under the router (n)
  int pool_size = 5;  // size of the selected pool (m)
  double lambda1 = 1.0;  // imitation weight in distillation
  double lambda2 = 1.0;  // diversity weight in distillation
  int routing_episodes = 20000;
  int distill_episodes = 20000;
  double kl_temperature = 1.0;
  int selection_states = 1024;
  int cross_play_blocks = 10;
  // Cross-play pairing: by default the exploiter trains against the frozen
  // routing policy; this flag instead pairs it against the newest population
  // member, the literal reading of the outer-loop pseudocode.
  bool exploiter_vs_latest = false;
  bool train_subs = true;
  double sub_lr = 5e-3;  // learning rate of the sub-policy updates (beta)
  // Recorded but not wired to behavior: no definition exists for it in the
  // hyperparameter tables this mirrors.
  int num_inferences = 3;

  void validate(int population_size_at_start) const;
};

// True on the iterations where the conflux pipeline replaces the plain
// best-response oracle.
bool conflux_should_run(int iteration, const ConfluxConfig& config);

// Mean over the state sample of KL(a(s) || b(s)), smoothed at temperature
// tau. Finite by construction thanks to the distribution floor.
double pairwise_kl(const Policy& a, const Policy& b, std::span<const StateSample> states,
                   double tau);

// Greedy diversity selection: sort by meta-NE probability (descending, ties
// to the lower index), seed with the top policy, then repeatedly promote the
// candidate with the largest minimum KL distance to the selected pool.
std::vector<int> select_sub_policies(const Population& pop, const MetaStrategy& sigma, int m,
                                     int n, std::span<const StateSample> states, double tau,
                                     int num_actions);

// Assembles the state sample for selection: the top policy's buffer,
// refreshed by greedy rollouts against the opponent meta-NE when short.
std::vector<StateSample> gather_selection_states(const Game& game, const Population& own_pop,
                                                 const MetaStrategy& own_sigma,
                                                 const Population& opp_pop,
                                                 const MetaStrategy& opp_sigma, int player,
                                                 int target_states, Rng& rng);

// Router over n copied sub-policies. The deployed policy picks the sub with
// the highest router Q-value and plays that sub's greedy action.
struct RoutingPolicy {
  QNetwork router;
  std::vector<PolicySnapshot> subs;  // deep copies, never population aliases
  std::vector<int> provenance;       // population indices the subs came from

  PolicyRef as_policy(int num_actions) const;
};

void save_routing(const std::filesystem::path& dir, const RoutingPolicy& routing);
RoutingPolicy load_routing(const std::filesystem::path& dir);

struct CrossPlayResult {
  RoutingPolicy routing;
  QNetwork exploiter;
};

// Cross-play: alternating blocks of (a) exploiter DQN training against the
// frozen current routing policy and (b) routing-policy training against the
// frozen exploiter. The router picks a sub index per state; the chosen sub
// plays greedily, feeds the router's TD update, and (when enabled) takes its
// own TD update on the environment transition.
CrossPlayResult train_routing(const Game& game, int player, std::vector<PolicySnapshot> subs,
                              const Population& own_pop, const ConfluxConfig& config,
                              const DqnHyper& hyper, uint64_t seed);

// Optional early stop for fixture training: evaluate the greedy router every
// eval_every episodes and stop once its mean utility reaches target.
struct EarlyStop {
  double target = 1.0;
  int eval_every = 500;
  int eval_episodes = 20;
};

// Fixture path: train the router over fixed subs against one fixed opponent
// (no cross-play).
RoutingPolicy train_router_vs_fixed(const Game& game, int player,
                                    std::vector<PolicySnapshot> subs, const Policy& opponent,
                                    const ConfluxConfig& config, const DqnHyper& hyper,
                                    int episodes, uint64_t seed,
                                    const std::optional<EarlyStop>& early_stop = std::nullopt);

// Compresses the routing policy into a single network by DQN on shaped
// rewards: terminal utility, an imitation penalty toward the routing
// deployment distribution (lambda1), and a diversity bonus away from the
// population (lambda2).
PolicySnapshot distill(const Game& game, int player, const RoutingPolicy& routing,
                       const Population& own_pop, const Population& opp_pop,
                       const MetaStrategy& opp_sigma, const ConfluxConfig& config,
                       const DqnHyper& hyper, int iteration, uint64_t seed,
                       int reservoir_capacity = 10000);

}  // namespace cpsro
