#include "cpsro/eval.hpp"

#include <cmath>
#include <functional>
#include <memory>

#include "cpsro/error.hpp"

namespace cpsro {

namespace {

void bump_nodes(int64_t& nodes, int64_t cap, const char* where) {
  if (++nodes > cap) {
    throw CapacityError(std::string(where) +
                        ": game tree exceeds the node cap; use the approximate path");
  }
}

std::vector<double> behavioral_at(const Behavioral& strategy, const std::string& key,
                                  std::span<const uint8_t> legal) {
  auto it = strategy.find(key);
  if (it == strategy.end()) return uniform_over_legal(legal);
  return it->second;
}

std::string history_id(const State& state) {
  std::string id;
  id.reserve(state.history().size() * 3);
  for (const auto& [actor, action] : state.history()) {
    id += std::to_string(action);
    id += ';';
  }
  return id;
}

}  // namespace

Behavioral aggregate_behavioral(const Game& game, std::span<const PolicyRef> policies,
                                std::span<const double> sigma, int player,
                                Realization realization, double tau, int64_t node_cap) {
  CPSRO_CHECK(policies.size() == sigma.size(), "aggregate_behavioral: sigma size mismatch");
  CPSRO_CHECK(!policies.empty(), "aggregate_behavioral: empty mixture");
  if (!game.perfect_recall()) {
    throw ContractViolation(
        "aggregate_behavioral: imperfect-recall game; use the approximate path");
  }
  const int k = static_cast<int>(policies.size());
  Behavioral out;
  // Per-policy distributions per infoset, computed once on first visit.
  std::unordered_map<std::string, std::vector<std::vector<double>>> dist_cache;
  int64_t nodes = 0;

  std::function<void(const State&, const std::vector<double>&)> walk =
      [&](const State& state, const std::vector<double>& reach) {
        bump_nodes(nodes, node_cap, "aggregate_behavioral");
        if (state.is_terminal()) return;
        if (state.is_chance()) {
          for (const auto& outcome : state.chance_outcomes()) {
            auto child = state.child(outcome.action);
            walk(*child, reach);
          }
          return;
        }
        const int actor = state.current_player();
        if (actor != player) {
          for (Action a : state.legal_actions()) {
            auto child = state.child(a);
            walk(*child, reach);
          }
          return;
        }
        const auto sample = make_sample(state, player, game.num_actions());
        auto cache_it = dist_cache.find(sample.key);
        if (cache_it == dist_cache.end()) {
          std::vector<std::vector<double>> dists(k);
          for (int i = 0; i < k; ++i) {
            dists[i] = realization == Realization::kGreedy
                           ? policies[i]->deployment_distribution(sample)
                           : policies[i]->distribution(sample, tau);
          }
          cache_it = dist_cache.emplace(sample.key, std::move(dists)).first;
          // Perfect recall: every history in this infoset carries the same
          // own-reach vector, so the mix is fixed on first visit. Unreached
          // infosets (zero mass under every policy) default to uniform.
          std::vector<double> mix(game.num_actions(), 0.0);
          double denom = 0.0;
          for (int i = 0; i < k; ++i) denom += sigma[i] * reach[i];
          if (denom > 1e-300) {
            for (int i = 0; i < k; ++i) {
              const double w = sigma[i] * reach[i] / denom;
              if (w == 0.0) continue;
              for (int a = 0; a < game.num_actions(); ++a) {
                mix[a] += w * cache_it->second[i][a];
              }
            }
          } else {
            mix = uniform_over_legal(sample.legal);
          }
          out[sample.key] = std::move(mix);
        }
        const auto& dists = cache_it->second;
        std::vector<double> next_reach(k);
        for (Action a : state.legal_actions()) {
          for (int i = 0; i < k; ++i) next_reach[i] = reach[i] * dists[i][a];
          auto child = state.child(a);
          walk(*child, next_reach);
        }
      };

  auto root = game.new_initial_state();
  walk(*root, std::vector<double>(k, 1.0));
  return out;
}

namespace {

// Exact best response: a prepass collects each own infoset's histories with
// their counterfactual (chance x opponent) reach; the value pass picks the
// argmax action per infoset and propagates exact expectations, memoized per
// history.
class BrSolver {
 public:
  BrSolver(const Game& game, const Behavioral& opponent, int player, int64_t node_cap)
      : game_(game), opponent_(opponent), player_(player), node_cap_(node_cap) {}

  BestResponse solve() {
    auto root = game_.new_initial_state();
    prepass(*root, 1.0);
    BestResponse br;
    br.value = value(*root);
    for (const auto& [key, entries] : infosets_) {
      br.strategy[key] = one_hot(best_action(key), game_.num_actions());
    }
    return br;
  }

 private:
  struct InfosetEntry {
    std::unique_ptr<State> state;
    double cf_reach;
  };

  void prepass(const State& state, double cf_reach) {
    bump_nodes(nodes_, node_cap_, "best_response_value");
    if (state.is_terminal()) return;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) {
        auto child = state.child(outcome.action);
        prepass(*child, cf_reach * outcome.probability);
      }
      return;
    }
    if (state.current_player() == player_) {
      infosets_[state.information_state_key(player_)].push_back({state.clone(), cf_reach});
      for (Action a : state.legal_actions()) {
        auto child = state.child(a);
        prepass(*child, cf_reach);
      }
      return;
    }
    const auto sample = make_sample(state, state.current_player(), game_.num_actions());
    const auto dist = behavioral_at(opponent_, sample.key, sample.legal);
    for (Action a : state.legal_actions()) {
      auto child = state.child(a);
      prepass(*child, cf_reach * dist[a]);
    }
  }

  double value(const State& state) {
    if (state.is_terminal()) return state.returns()[player_];
    std::string id = history_id(state);
    auto memo = value_memo_.find(id);
    if (memo != value_memo_.end()) return memo->second;
    double v = 0.0;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) {
        auto child = state.child(outcome.action);
        v += outcome.probability * value(*child);
      }
    } else if (state.current_player() == player_) {
      auto child = state.child(best_action(state.information_state_key(player_)));
      v = value(*child);
    } else {
      const auto sample = make_sample(state, state.current_player(), game_.num_actions());
      const auto dist = behavioral_at(opponent_, sample.key, sample.legal);
      for (Action a : state.legal_actions()) {
        if (dist[a] == 0.0) continue;
        auto child = state.child(a);
        v += dist[a] * value(*child);
      }
    }
    value_memo_.emplace(std::move(id), v);
    return v;
  }

  Action best_action(const std::string& key) {
    auto memo = action_memo_.find(key);
    if (memo != action_memo_.end()) return memo->second;
    const auto& entries = infosets_.at(key);
    const auto legal = entries.front().state->legal_actions();
    Action best = legal.front();
    double best_value = -std::numeric_limits<double>::infinity();
    for (Action a : legal) {
      double cf_value = 0.0;
      for (const auto& entry : entries) {
        auto child = entry.state->child(a);
        cf_value += entry.cf_reach * value(*child);
      }
      if (cf_value > best_value) {
        best_value = cf_value;
        best = a;
      }
    }
    action_memo_.emplace(key, best);
    return best;
  }

  const Game& game_;
  const Behavioral& opponent_;
  int player_;
  int64_t node_cap_;
  int64_t nodes_ = 0;
  std::unordered_map<std::string, std::vector<InfosetEntry>> infosets_;
  std::unordered_map<std::string, double> value_memo_;
  std::unordered_map<std::string, Action> action_memo_;
};

}  // namespace

BestResponse best_response_value(const Game& game, const Behavioral& opponent, int player,
                                 int64_t node_cap) {
  if (!game.perfect_recall()) {
    throw ContractViolation("best_response_value: imperfect-recall game");
  }
  return BrSolver(game, opponent, player, node_cap).solve();
}

ExploitabilityReport exploitability_behavioral(const Game& game, const Behavioral& b0,
                                               const Behavioral& b1, int64_t node_cap) {
  ExploitabilityReport report;
  report.br_values[0] = best_response_value(game, b1, 0, node_cap).value;
  report.br_values[1] = best_response_value(game, b0, 1, node_cap).value;
  report.value = report.br_values[0] + report.br_values[1];
  return report;
}

ExploitabilityReport exploitability(const Game& game, const MixedProfile& profile,
                                    Realization realization, double tau, int64_t node_cap) {
  const Behavioral b0 = aggregate_behavioral(game, profile.policies[0], profile.sigma[0], 0,
                                             realization, tau, node_cap);
  const Behavioral b1 = aggregate_behavioral(game, profile.policies[1], profile.sigma[1], 1,
                                             realization, tau, node_cap);
  return exploitability_behavioral(game, b0, b1, node_cap);
}

ExploitabilityReport approx_exploitability(const Game& game, const MixedProfile& profile,
                                           const DqnHyper& hyper, int train_episodes,
                                           uint64_t seed, int eval_episodes) {
  ExploitabilityReport report;
  report.approximate = true;
  for (int player = 0; player < 2; ++player) {
    OpponentMixture opponents{profile.policies[1 - player],
                              {profile.sigma[1 - player].begin(), profile.sigma[1 - player].end()}};
    auto oracle = train_oracle(game, player, opponents, hyper, train_episodes,
                               derive_seed(seed, {0xa99ULL, static_cast<uint64_t>(player)}));
    const NetPolicy exploiter(std::make_shared<QNetwork>(std::move(oracle.net)));
    Rng rng(derive_seed(seed, {0xe7a1ULL, static_cast<uint64_t>(player)}));
    const Utility utility = head_to_head(game, exploiter, player, profile.policies[1 - player],
                                         profile.sigma[1 - player], eval_episodes, rng);
    report.br_values[player] = utility.mean;
  }
  report.value = report.br_values[0] + report.br_values[1];
  return report;
}

double expected_value(const Game& game, const Policy& p0, const Policy& p1, int64_t node_cap) {
  int64_t nodes = 0;
  std::function<double(const State&)> walk = [&](const State& state) -> double {
    bump_nodes(nodes, node_cap, "expected_value");
    if (state.is_terminal()) return state.returns()[0];
    double v = 0.0;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) {
        auto child = state.child(outcome.action);
        v += outcome.probability * walk(*child);
      }
      return v;
    }
    const int actor = state.current_player();
    const auto sample = make_sample(state, actor, game.num_actions());
    const auto dist = (actor == 0 ? p0 : p1).deployment_distribution(sample);
    for (Action a : state.legal_actions()) {
      if (dist[a] == 0.0) continue;
      auto child = state.child(a);
      v += dist[a] * walk(*child);
    }
    return v;
  };
  auto root = game.new_initial_state();
  return walk(*root);
}

double expected_value_behavioral(const Game& game, const Behavioral& b0, const Behavioral& b1,
                                 int64_t node_cap) {
  int64_t nodes = 0;
  std::function<double(const State&)> walk = [&](const State& state) -> double {
    bump_nodes(nodes, node_cap, "expected_value_behavioral");
    if (state.is_terminal()) return state.returns()[0];
    double v = 0.0;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) {
        auto child = state.child(outcome.action);
        v += outcome.probability * walk(*child);
      }
      return v;
    }
    const int actor = state.current_player();
    const auto sample = make_sample(state, actor, game.num_actions());
    const auto dist = behavioral_at(actor == 0 ? b0 : b1, sample.key, sample.legal);
    for (Action a : state.legal_actions()) {
      if (dist[a] == 0.0) continue;
      auto child = state.child(a);
      v += dist[a] * walk(*child);
    }
    return v;
  };
  auto root = game.new_initial_state();
  return walk(*root);
}

double expected_value_vs_mixture(const Game& game, const Policy& policy, int player,
                                 std::span<const PolicyRef> opponents,
                                 std::span<const double> sigma, int64_t node_cap) {
  CPSRO_CHECK(opponents.size() == sigma.size(), "expected_value_vs_mixture: sigma mismatch");
  double v = 0.0;
  for (size_t k = 0; k < opponents.size(); ++k) {
    if (sigma[k] == 0.0) continue;
    const double pair_value = player == 0 ? expected_value(game, policy, *opponents[k], node_cap)
                                          : expected_value(game, *opponents[k], policy, node_cap);
    v += sigma[k] * (player == 0 ? pair_value : -pair_value);
  }
  return v;
}

Utility head_to_head(const Game& game, const Policy& policy, int player,
                     std::span<const PolicyRef> opponents, std::span<const double> sigma,
                     int episodes, Rng& rng) {
  CPSRO_CHECK(episodes >= 1, "head_to_head: episodes must be >= 1");
  CPSRO_CHECK(opponents.size() == sigma.size(), "head_to_head: sigma mismatch");
  double total = 0.0, total_sq = 0.0;
  for (int episode = 0; episode < episodes; ++episode) {
    const Policy& opponent =
        opponents.size() == 1 ? *opponents[0] : *opponents[rng.categorical(sigma)];
    const double u0 = player == 0 ? play_episode(game, policy, opponent, rng)
                                  : play_episode(game, opponent, policy, rng);
    const double u = player == 0 ? u0 : -u0;
    total += u;
    total_sq += u * u;
  }
  Utility result;
  result.mean = total / episodes;
  if (episodes > 1) {
    const double var =
        std::max(0.0, (total_sq - episodes * result.mean * result.mean) / (episodes - 1));
    result.stderr_ = std::sqrt(var / episodes);
  }
  return result;
}

}  // namespace cpsro
