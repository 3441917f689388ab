#include "oracles/tree_enum.hpp"

#include <functional>
#include <limits>
#include <map>

#include "cpsro/policy.hpp"

namespace cpsro::oracles {
namespace {

std::vector<double> opponent_dist(const Behavioral& opponent, const StateSample& sample) {
  auto it = opponent.find(sample.key);
  if (it == opponent.end()) return uniform_over_legal(sample.legal);
  return it->second;
}

}  // namespace

double enumeration_best_response(const Game& game, const Behavioral& opponent, int player) {
  // Collect the player's infosets and their legal actions (ordered map so the
  // enumeration order is stable).
  std::map<std::string, std::vector<Action>> infosets;
  std::function<void(const State&)> collect = [&](const State& state) {
    if (state.is_terminal()) return;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) collect(*state.child(outcome.action));
      return;
    }
    if (state.current_player() == player) {
      infosets.emplace(state.information_state_key(player), state.legal_actions());
    }
    for (Action a : state.legal_actions()) collect(*state.child(a));
  };
  collect(*game.new_initial_state());

  std::vector<std::vector<Action>> choices;
  std::map<std::string, int> key_index;
  for (auto& [key, legal] : infosets) {
    key_index[key] = static_cast<int>(choices.size());
    choices.push_back(legal);
  }

  // Expected value of one pure strategy (an action index per infoset).
  std::function<double(const State&, const std::vector<int>&)> ev =
      [&](const State& state, const std::vector<int>& assignment) -> double {
    if (state.is_terminal()) return state.returns()[player];
    double v = 0.0;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) {
        v += outcome.probability * ev(*state.child(outcome.action), assignment);
      }
      return v;
    }
    const int actor = state.current_player();
    if (actor == player) {
      const int idx = key_index.at(state.information_state_key(player));
      return ev(*state.child(choices[idx][assignment[idx]]), assignment);
    }
    const auto sample = make_sample(state, actor, game.num_actions());
    const auto dist = opponent_dist(opponent, sample);
    for (Action a : state.legal_actions()) {
      if (dist[a] == 0.0) continue;
      v += dist[a] * ev(*state.child(a), assignment);
    }
    return v;
  };

  // Odometer over all pure-strategy assignments.
  std::vector<int> assignment(choices.size(), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, ev(*game.new_initial_state(), assignment));
    if (assignment.empty()) break;
    size_t pos = 0;
    while (pos < assignment.size()) {
      if (++assignment[pos] < static_cast<int>(choices[pos].size())) break;
      assignment[pos] = 0;
      pos++;
    }
    if (pos == assignment.size()) break;
  }
  return best;
}

}  // namespace cpsro::oracles
