#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cpsro/error.hpp"

namespace cpsro {

using Action = int;

inline constexpr int kNumPlayers = 2;
inline constexpr int kChancePlayer = -1;
inline constexpr int kTerminalPlayer = -2;

struct ChanceOutcome {
  Action action;
  double probability;
};

// One ply of a game. States form a tree rooted at Game::new_initial_state();
// child() is pure, apply_action() advances in place for rollout loops that
// own their state. Transitions are deterministic given (state, action);
// randomness lives only in chance nodes.
class State {
 public:
  virtual ~State() = default;

  virtual std::unique_ptr<State> clone() const = 0;

  // 0 or 1 at decision nodes, kChancePlayer at chance nodes,
  // kTerminalPlayer once the game is over.
  virtual int current_player() const = 0;
  bool is_terminal() const { return current_player() == kTerminalPlayer; }
  bool is_chance() const { return current_player() == kChancePlayer; }

  // Non-empty, sorted, for the acting player at a decision node.
  virtual std::vector<Action> legal_actions() const = 0;

  // Outcomes at a chance node; probabilities sum to 1.
  virtual std::vector<ChanceOutcome> chance_outcomes() const = 0;

  // Utilities (player 0, player 1) at a terminal state; they sum to zero.
  virtual std::array<double, 2> returns() const = 0;

  // Canonical string for the acting player's information state: everything
  // the player has observed plus their own actions so far.
  virtual std::string information_state_key(int player) const = 0;

  // Fixed-length feature vector for the acting player; a deterministic
  // function of information_state_key.
  virtual std::vector<double> encode(int player) const = 0;

  void apply_action(Action action) {
    validate_action(action);
    do_apply(action);
    history_.emplace_back(actor_before_apply_, action);
  }

  std::unique_ptr<State> child(Action action) const {
    auto next = clone();
    next->apply_action(action);
    return next;
  }

  const std::vector<std::pair<int, Action>>& history() const { return history_; }

 protected:
  virtual void do_apply(Action action) = 0;

  std::vector<std::pair<int, Action>> history_;

 private:
  void validate_action(Action action) {
    CPSRO_CHECK(!is_terminal(), "apply_action on a terminal state");
    actor_before_apply_ = current_player();
    if (is_chance()) {
      for (const auto& outcome : chance_outcomes()) {
        if (outcome.action == action) return;
      }
      throw ContractViolation("apply_action: unknown chance outcome " + std::to_string(action));
    }
    for (Action a : legal_actions()) {
      if (a == action) return;
    }
    throw ContractViolation("apply_action: illegal action " + std::to_string(action));
  }

  int actor_before_apply_ = kChancePlayer;
};

class Game {
 public:
  virtual ~Game() = default;

  virtual std::string id() const = 0;
  virtual std::unique_ptr<State> new_initial_state() const = 0;

  // Size of the global action space; all legal_actions() fall below it.
  virtual int num_actions() const = 0;
  virtual int feature_size() const = 0;
  // Bound on plies (including chance) of any playthrough.
  virtual int max_depth() const = 0;
  virtual double max_payoff() const = 0;

  virtual bool perfect_recall() const { return true; }

  // Affine rescale applied when reporting utilities (identity by default;
  // win/loss games that are conventionally reported on [0,1] override it).
  virtual double report_scale(double utility) const { return utility; }
};

// Registry of built-in games, addressed by string id.
std::shared_ptr<const Game> make_game(const std::string& id);
std::vector<std::string> registered_games();

}  // namespace cpsro
