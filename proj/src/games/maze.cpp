// Pursuit game on a 4x7 grid: the human (player 0) tries to reach the shelter
// while the monster (player 1) tries to land on the human. Each step pair is
// a serialized simultaneous move: the human commits first and the monster
// commits blind to that pending choice; the human's move resolves first.
// The monster moves one or two cells in a straight line and a two-cell move
// captures en route. Hitting the step-pair cap is a draw.

#include <memory>
#include <string>
#include <vector>

#include "cpsro/games/maze.hpp"
#include "games/registry.hpp"

namespace cpsro {
namespace {

using namespace maze;

struct Cell {
  int row = 0, col = 0;
  bool operator==(const Cell&) const = default;
};

constexpr Cell kShelter{kShelterRow, kShelterCol};
constexpr Cell kSwitchCell{kSwitchRow, kSwitchCol};

bool in_grid(Cell c) { return c.row >= 1 && c.row <= kRows && c.col >= 1 && c.col <= kCols; }

Cell step(Cell c, int dir) {
  switch (dir) {
    case kUp: return {c.row - 1, c.col};
    case kDown: return {c.row + 1, c.col};
    case kLeft: return {c.row, c.col - 1};
    default: return {c.row, c.col + 1};
  }
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

class MazeState final : public State {
 public:
  MazeState()
      : human_{kHumanStartRow, kHumanStartCol}, monster_{kMonsterStartRow, kMonsterStartCol} {}

  std::unique_ptr<State> clone() const override { return std::make_unique<MazeState>(*this); }

  int current_player() const override {
    if (outcome_ != Outcome::kOpen) return kTerminalPlayer;
    return pending_ < 0 ? 0 : 1;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal(), "legal_actions: terminal state");
    std::vector<Action> actions;
    const Cell from = current_player() == 0 ? human_ : monster_;
    for (int dir = 0; dir < 4; ++dir) {
      if (in_grid(step(from, dir))) actions.push_back(dir);
    }
    if (current_player() == 1) {
      for (int dir = 0; dir < 4; ++dir) {
        if (in_grid(step(step(from, dir), dir))) actions.push_back(4 + dir);
      }
    }
    return actions;
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    throw ContractViolation("chance_outcomes: maze has no chance nodes");
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: state not terminal");
    switch (outcome_) {
      case Outcome::kHumanWins: return {1.0, -1.0};
      case Outcome::kCaptured: return {-1.0, 1.0};
      default: return {0.0, 0.0};
    }
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(!is_terminal(), "information_state_key: terminal state");
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    // Resolved moves are public, so the key shows pair-start positions plus
    // the full resolved move list; the human's pending move stays hidden
    // from the monster. "sw" flags whether the human has visited the
    // pi2-to-pi1 switch cell.
    std::string key = "mz|p" + std::to_string(player) + "|t" + std::to_string(pairs_) + "|h" +
                      std::to_string(human_.row) + "," + std::to_string(human_.col) + "|m" +
                      std::to_string(monster_.row) + "," + std::to_string(monster_.col) + "|sw" +
                      (visited_switch_ ? "1" : "0") + "|hist:";
    const size_t shown = (player == 1 && pending_ >= 0) ? history().size() - 1 : history().size();
    for (size_t i = 0; i < shown; ++i) key += std::to_string(history()[i].second);
    return key;
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(!is_terminal(), "encode: terminal state");
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    // [player(2), human cell one-hot(28), monster cell one-hot(28)];
    // positions are pair-start, so the monster never sees the pending move.
    std::vector<double> x(2 + 2 * kRows * kCols, 0.0);
    x[player] = 1.0;
    x[2 + (human_.row - 1) * kCols + (human_.col - 1)] = 1.0;
    x[2 + kRows * kCols + (monster_.row - 1) * kCols + (monster_.col - 1)] = 1.0;
    return x;
  }

  Cell human() const { return human_; }
  Cell monster() const { return monster_; }
  bool visited_switch() const { return visited_switch_; }

 protected:
  void do_apply(Action action) override {
    if (pending_ < 0) {
      pending_ = action;
      return;
    }
    // Resolve the pair, human first.
    const Cell human_to = step(human_, pending_);
    pending_ = -1;
    if (human_to == monster_) {
      human_ = human_to;
      outcome_ = Outcome::kCaptured;
      return;
    }
    human_ = human_to;
    if (human_ == kSwitchCell) visited_switch_ = true;
    if (human_ == kShelter) {
      outcome_ = Outcome::kHumanWins;
      return;
    }
    const int dir = action % 4;
    const int steps = action < 4 ? 1 : 2;
    for (int s = 0; s < steps; ++s) {
      monster_ = step(monster_, dir);
      if (monster_ == human_) {
        outcome_ = Outcome::kCaptured;
        return;
      }
    }
    if (++pairs_ >= kMaxStepPairs) outcome_ = Outcome::kDraw;
  }

 private:
  enum class Outcome { kOpen, kHumanWins, kCaptured, kDraw };

  Cell human_, monster_;
  int pending_ = -1;
  int pairs_ = 0;
  bool visited_switch_ = false;
  Outcome outcome_ = Outcome::kOpen;
};

class MazeGame final : public Game {
 public:
  std::string id() const override { return "maze"; }
  std::unique_ptr<State> new_initial_state() const override { return std::make_unique<MazeState>(); }
  int num_actions() const override { return 8; }
  int feature_size() const override { return 2 + 2 * kRows * kCols; }
  int max_depth() const override { return 2 * kMaxStepPairs; }
  double max_payoff() const override { return 1.0; }
};

// ---- scripted fixture policies ------------------------------------------

// pi1: climb to the top row, then sweep left; once on the right flank
// (col >= 6) zig up to the shelter.
Action pi1_move(Cell h) {
  if (h.col >= 6) {
    if (h == Cell{3, 6} || h == Cell{4, 6} || h == Cell{3, 7} || h == Cell{4, 7}) return kUp;
    if (h == Cell{2, 6} || h == Cell{1, 6}) return kRight;
    if (h == Cell{2, 7}) return kUp;
    return kDown;  // (1,7) is the shelter; unreachable while playing
  }
  if (h.row > 1) return kUp;
  return h.col > 1 ? kLeft : kDown;
}

// pi2: zig-zag ladder from the start to the switch cell, then on into the
// bottom-right corner where it shuttles back and forth.
Action pi2_move(Cell h) {
  struct Entry { Cell cell; Action move; };
  static constexpr Entry kPath[] = {
      {{4, 3}, kUp},   {{3, 3}, kRight}, {{3, 4}, kDown}, {{4, 4}, kRight},
      {{4, 5}, kUp},   {{3, 5}, kRight}, {{3, 6}, kRight}, {{3, 7}, kDown},
      {{4, 7}, kLeft}, {{4, 6}, kRight}, {{2, 6}, kDown}, {{2, 7}, kDown},
      {{1, 6}, kDown}, {{1, 7}, kDown},  {{2, 5}, kDown}, {{1, 5}, kDown},
  };
  for (const auto& entry : kPath) {
    if (entry.cell == h) return entry.move;
  }
  if (h.col < kCols) return kRight;
  return h.row < kRows ? kDown : kLeft;
}

// pi3: run right along the bottom row.
Action pi3_move(Cell h) {
  if (h.row < kRows) return kDown;
  return h.col < kCols ? kRight : kUp;
}

Action monster_move(Cell m, Cell h_target) {
  int best_dist = 1 << 20;
  Action best = kUp;
  for (int dir = 0; dir < 4; ++dir) {
    const Cell one = step(m, dir);
    if (!in_grid(one)) continue;
    Action candidate = dir;
    int dist = manhattan(one, h_target);
    const Cell two = step(one, dir);
    if (in_grid(two) && manhattan(two, h_target) < dist) {
      candidate = 4 + dir;
      dist = manhattan(two, h_target);
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = candidate;
    }
  }
  return best;
}

Action scripted_move(const std::string& id, int player, Cell h, Cell m, bool visited_switch) {
  if (id == "monster") {
    CPSRO_CHECK(player == 1, "monster script controls player 1");
    return monster_move(m, h);
  }
  CPSRO_CHECK(player == 0, "human scripts control player 0");
  if (id == "pi1") return pi1_move(h);
  if (id == "pi2") return pi2_move(h);
  if (id == "pi3") return pi3_move(h);
  if (id == "switch") return visited_switch ? pi1_move(h) : pi2_move(h);
  throw ConfigError("unknown maze script '" + id + "'");
}

}  // namespace

std::shared_ptr<const Game> make_maze() { return std::make_shared<MazeGame>(); }

namespace maze {

bool is_script_id(const std::string& id) {
  return id == "pi1" || id == "pi2" || id == "pi3" || id == "switch" || id == "monster";
}

Action scripted_action(const std::string& script_id, const State& state) {
  const auto* s = dynamic_cast<const MazeState*>(&state);
  CPSRO_CHECK(s != nullptr, "scripted_action: not a maze state");
  return scripted_move(script_id, s->current_player(), {s->human().row, s->human().col},
                       {s->monster().row, s->monster().col}, s->visited_switch());
}

Action scripted_action_from_key(const std::string& script_id, const std::string& key) {
  // Key layout: mz|p{i}|t{pair}|h{r},{c}|m{r},{c}|sw{0,1}|hist:...
  CPSRO_CHECK(key.rfind("mz|", 0) == 0, "scripted_action_from_key: not a maze key");
  const int player = key[4] - '0';
  const auto h_at = key.find("|h") + 2;
  const auto m_at = key.find("|m") + 2;
  const auto sw_at = key.find("|sw") + 3;
  auto parse_cell = [&key](size_t at) {
    const int row = key[at] - '0';
    const int col = key[at + 2] - '0';
    return Cell{row, col};
  };
  return scripted_move(script_id, player, parse_cell(h_at), parse_cell(m_at), key[sw_at] == '1');
}

}  // namespace maze
}  // namespace cpsro
