#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "cpsro/game.hpp"
#include "cpsro/games/maze.hpp"
#include "cpsro/rng.hpp"
#include "doctest.h"

using namespace cpsro;

namespace {

struct WalkStats {
  int64_t nodes = 0;
  int max_depth = 0;
};

// Exhaustive walk checking zero-sum returns, chance normalization, bounded
// depth, and (optionally) perfect recall: the acting player's key must pin
// down their own action sequence.
void walk_game(const Game& game, bool check_perfect_recall) {
  std::unordered_map<std::string, std::vector<Action>> key_to_own_actions;
  WalkStats stats;
  std::function<void(const State&, int, std::array<std::vector<Action>, 2>&)> visit =
      [&](const State& state, int depth, std::array<std::vector<Action>, 2>& own_actions) {
        stats.nodes++;
        stats.max_depth = std::max(stats.max_depth, depth);
        REQUIRE(depth <= game.max_depth());
        if (state.is_terminal()) {
          const auto u = state.returns();
          CHECK(u[0] + u[1] == 0.0);
          CHECK(std::abs(u[0]) <= game.max_payoff());
          return;
        }
        if (state.is_chance()) {
          double total = 0.0;
          for (const auto& outcome : state.chance_outcomes()) {
            CHECK(outcome.probability > 0.0);
            total += outcome.probability;
            auto child = state.child(outcome.action);
            visit(*child, depth + 1, own_actions);
          }
          CHECK(std::abs(total - 1.0) < 1e-9);
          return;
        }
        const int player = state.current_player();
        const auto legal = state.legal_actions();
        REQUIRE(!legal.empty());
        for (Action a : legal) REQUIRE(a < game.num_actions());
        const auto key = state.information_state_key(player);
        const auto features = state.encode(player);
        REQUIRE(static_cast<int>(features.size()) == game.feature_size());
        for (double v : features) REQUIRE(std::isfinite(v));
        CHECK(state.encode(player) == features);  // determinism
        if (check_perfect_recall) {
          auto [it, inserted] = key_to_own_actions.emplace(key, own_actions[player]);
          if (!inserted) CHECK(it->second == own_actions[player]);
        }
        for (Action a : legal) {
          auto child = state.child(a);
          own_actions[player].push_back(a);
          visit(*child, depth + 1, own_actions);
          own_actions[player].pop_back();
        }
      };
  auto root = game.new_initial_state();
  std::array<std::vector<Action>, 2> own_actions;
  visit(*root, 0, own_actions);
  CHECK(stats.nodes > 1);
}

std::unique_ptr<State> apply_all(const Game& game, const std::vector<Action>& actions) {
  auto state = game.new_initial_state();
  for (Action a : actions) state->apply_action(a);
  return state;
}

}  // namespace

TEST_CASE("registry lists the six built-in games") {
  const auto ids = registered_games();
  CHECK(ids.size() == 6);
  for (const auto& id : ids) CHECK(make_game(id)->id() == id);
  CHECK_THROWS_AS(make_game("chess"), ConfigError);
}

TEST_CASE("kuhn root is a chance node with six ordered deals") {
  auto game = make_game("kuhn");
  auto root = game->new_initial_state();
  CHECK(root->is_chance());
  CHECK(root->chance_outcomes().size() == 6);
  auto dealt = root->child(0);
  CHECK(dealt->current_player() == 0);
  CHECK(dealt->legal_actions() == std::vector<Action>{0, 1});
}

TEST_CASE("kuhn terminal payoffs follow the betting sequence") {
  auto game = make_game("kuhn");
  // Deal 0 is (J, Q): both pass, higher card (player 1) wins the ante.
  auto state = apply_all(*game, {0, 0, 0});
  CHECK(state->is_terminal());
  CHECK(state->returns() == std::array<double, 2>{-1.0, 1.0});
  // Deal 5 is (K, Q): bet / call showdown worth 2.
  state = apply_all(*game, {5, 1, 1});
  CHECK(state->returns() == std::array<double, 2>{2.0, -2.0});
  // Bet then fold: bettor takes the ante regardless of cards.
  state = apply_all(*game, {0, 1, 0});
  CHECK(state->returns() == std::array<double, 2>{1.0, -1.0});
}

TEST_CASE("kuhn keys hide the opponent card") {
  auto game = make_game("kuhn");
  // Deals (J,Q) and (J,K): player 0 acting first sees the same key.
  auto a = apply_all(*game, {0});
  auto b = apply_all(*game, {1});
  CHECK(a->information_state_key(0) == b->information_state_key(0));
  CHECK(a->encode(0) == b->encode(0));
}

TEST_CASE("contract violations throw") {
  auto game = make_game("kuhn");
  auto terminal = apply_all(*game, {0, 0, 0});
  CHECK_THROWS_AS(terminal->legal_actions(), ContractViolation);
  CHECK_THROWS_AS(terminal->apply_action(0), ContractViolation);
  auto root = game->new_initial_state();
  CHECK_THROWS_AS(root->returns(), ContractViolation);
  auto dealt = root->child(0);
  CHECK_THROWS_AS(dealt->apply_action(7), ContractViolation);
}

TEST_CASE("child is pure: parent state unchanged") {
  auto game = make_game("leduc");
  auto root = game->new_initial_state();
  auto child = root->child(0);
  CHECK(root->is_chance());
  CHECK(root->history().empty());
  CHECK(child->history().size() == 1);
}

TEST_CASE("goofspiel5 root holdings and spent cards") {
  auto game = make_game("goofspiel5");
  auto root = game->new_initial_state();
  CHECK(root->current_player() == 0);
  CHECK(root->legal_actions() == std::vector<Action>{0, 1, 2, 3, 4});
  // Player 0 bids card 3 (action id 2), player 1 bids card 1; round 2 hand
  // for player 0 excludes the spent card.
  auto state = apply_all(*game, {2, 0});
  CHECK(state->current_player() == 0);
  CHECK(state->legal_actions() == std::vector<Action>{0, 1, 3, 4});
}

TEST_CASE("goofspiel5 winner by points, report scale on [0,1]") {
  auto game = make_game("goofspiel5");
  auto state = game->new_initial_state();
  const std::vector<Action> p0_bids = {4, 3, 2, 1, 0};
  const std::vector<Action> p1_bids = {3, 2, 1, 0, 4};
  for (int round = 0; round < 5; ++round) {
    state->apply_action(p0_bids[round]);
    state->apply_action(p1_bids[round]);
  }
  CHECK(state->is_terminal());
  // Player 0 wins prizes 5,4,3,2 (14 points) and loses prize 1.
  CHECK(state->returns() == std::array<double, 2>{1.0, -1.0});
  CHECK(game->report_scale(1.0) == 1.0);
  CHECK(game->report_scale(-1.0) == 0.0);
  CHECK(game->report_scale(0.0) == 0.5);
}

TEST_CASE("goofspiel5 second mover is blind to the pending bid") {
  auto game = make_game("goofspiel5");
  auto a = apply_all(*game, {0});
  auto b = apply_all(*game, {4});
  CHECK(a->information_state_key(1) == b->information_state_key(1));
  CHECK(a->encode(1) == b->encode(1));
}

TEST_CASE("liars dice challenge resolution") {
  auto game = make_game("liars_dice");
  // Dice: (face 3, face 5). Player 0 bids one-three (id 2), player 1
  // challenges incorrectly and loses.
  auto state = apply_all(*game, {2, 4, 2, 12});
  CHECK(state->is_terminal());
  CHECK(state->returns() == std::array<double, 2>{1.0, -1.0});
  // Player 0 bids two-sixes (id 11), player 1 challenges correctly.
  state = apply_all(*game, {2, 4, 11, 12});
  CHECK(state->returns() == std::array<double, 2>{-1.0, 1.0});
}

TEST_CASE("liars dice bids must increase and liar needs a bid") {
  auto game = make_game("liars_dice");
  auto root_dealt = apply_all(*game, {0, 0});
  auto legal = root_dealt->legal_actions();
  CHECK(legal.size() == 12);  // all bids, no liar yet
  auto after_bid = root_dealt->child(5);
  legal = after_bid->legal_actions();
  CHECK(legal.front() == 6);
  CHECK(legal.back() == 12);
}

TEST_CASE("liars dice imperfect recall collapses bid histories") {
  auto game = make_game("liars_dice_ir");
  // Same die and same current bid via different bid paths.
  auto a = apply_all(*game, {2, 4, 0, 7});
  auto b = apply_all(*game, {2, 4, 3, 7});
  CHECK(a->current_player() == 0);
  CHECK(a->information_state_key(0) == b->information_state_key(0));
  CHECK(a->encode(0) == b->encode(0));
  // The perfect-recall variant distinguishes them.
  auto game_pr = make_game("liars_dice");
  auto c = apply_all(*game_pr, {2, 4, 0, 7});
  auto d = apply_all(*game_pr, {2, 4, 3, 7});
  CHECK(c->information_state_key(0) != d->information_state_key(0));
}

TEST_CASE("maze root and legality") {
  auto game = make_game("maze");
  auto root = game->new_initial_state();
  CHECK(root->current_player() == 0);
  // Start (4,3) is on the bottom row: down is wall-blocked.
  CHECK(root->legal_actions() == std::vector<Action>{maze::kUp, maze::kLeft, maze::kRight});
  auto pending = root->child(maze::kUp);
  CHECK(pending->current_player() == 1);
  // Monster at (1,1): up and left blocked, two-step moves available
  // down/right only.
  CHECK(pending->legal_actions() ==
        std::vector<Action>{maze::kDown, maze::kRight, maze::kDown2, maze::kRight2});
}

TEST_CASE("maze monster is blind to the pending human move") {
  auto game = make_game("maze");
  auto a = game->new_initial_state()->child(maze::kUp);
  auto b = game->new_initial_state()->child(maze::kRight);
  CHECK(a->information_state_key(1) == b->information_state_key(1));
  CHECK(a->encode(1) == b->encode(1));
}

namespace {

std::array<double, 2> play_scripted_maze(const std::string& human_script) {
  auto game = make_game("maze");
  auto state = game->new_initial_state();
  while (!state->is_terminal()) {
    const std::string& script = state->current_player() == 0 ? human_script : "monster";
    state->apply_action(maze::scripted_action(script, *state));
  }
  return state->returns();
}

}  // namespace

TEST_CASE("maze fixture: pi1 and pi2 lose alone, the switch wins") {
  CHECK(play_scripted_maze("pi1") == std::array<double, 2>{-1.0, 1.0});
  CHECK(play_scripted_maze("pi2") == std::array<double, 2>{-1.0, 1.0});
  CHECK(play_scripted_maze("pi3") == std::array<double, 2>{-1.0, 1.0});
  CHECK(play_scripted_maze("switch") == std::array<double, 2>{1.0, -1.0});
}

TEST_CASE("maze random play terminates within the step cap") {
  auto game = make_game("maze");
  Rng rng(7);
  for (int episode = 0; episode < 200; ++episode) {
    auto state = game->new_initial_state();
    int plies = 0;
    while (!state->is_terminal()) {
      const auto legal = state->legal_actions();
      state->apply_action(legal[rng.uniform_int(static_cast<int>(legal.size()))]);
      REQUIRE(++plies <= game->max_depth());
    }
    const auto u = state->returns();
    CHECK(u[0] + u[1] == 0.0);
  }
}

TEST_CASE("full tree walks: zero-sum, chance, depth, perfect recall") {
  walk_game(*make_game("kuhn"), /*check_perfect_recall=*/true);
  walk_game(*make_game("leduc"), /*check_perfect_recall=*/true);
  walk_game(*make_game("goofspiel5"), /*check_perfect_recall=*/true);
}

TEST_CASE("full tree walk: liars dice" * doctest::timeout(300)) {
  walk_game(*make_game("liars_dice"), /*check_perfect_recall=*/true);
}
