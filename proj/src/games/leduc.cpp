// Leduc poker: six cards (three ranks, two suits), one private card each, one
// public card, two betting rounds with raise sizes 2 and 4 and at most two
// raises per round. Utilities are pot-based, bounded by 13.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cpsro/game.hpp"
#include "games/registry.hpp"

namespace cpsro {
namespace {

constexpr Action kFold = 0;
constexpr Action kCall = 1;  // also check
constexpr Action kRaise = 2;

constexpr int kDeckSize = 6;  // card id c: rank c/2, suit c%2
constexpr int kMaxRaisesPerRound = 2;
constexpr std::array<double, 2> kRaiseSize = {2.0, 4.0};

int rank(int card) { return card / 2; }

class LeducState final : public State {
 public:
  LeducState() { contrib_ = {1.0, 1.0}; }  // antes

  std::unique_ptr<State> clone() const override { return std::make_unique<LeducState>(*this); }

  int current_player() const override {
    if (folded_ >= 0 || round_ == 2) return kTerminalPlayer;
    if (cards_[0] < 0 || cards_[1] < 0 || (round_ == 1 && board_ < 0)) return kChancePlayer;
    return to_act_;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal() && !is_chance(), "legal_actions: not at a decision node");
    std::vector<Action> actions;
    if (facing_raise()) actions.push_back(kFold);
    actions.push_back(kCall);
    if (raises_[round_] < kMaxRaisesPerRound) actions.push_back(kRaise);
    return actions;
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    CPSRO_CHECK(is_chance(), "chance_outcomes: not at a chance node");
    std::vector<ChanceOutcome> outcomes;
    for (int c = 0; c < kDeckSize; ++c) {
      if (c == cards_[0] || c == cards_[1]) continue;
      outcomes.push_back({c, 0.0});
    }
    for (auto& outcome : outcomes) outcome.probability = 1.0 / outcomes.size();
    return outcomes;
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: state not terminal");
    if (folded_ >= 0) {
      const int winner = 1 - folded_;
      const double pot = contrib_[folded_];
      return winner == 0 ? std::array<double, 2>{pot, -pot} : std::array<double, 2>{-pot, pot};
    }
    // Showdown: pairing the board wins, otherwise higher rank; equal ranks split.
    const int r0 = rank(cards_[0]), r1 = rank(cards_[1]), rb = rank(board_);
    int winner;
    if (r0 == rb) winner = 0;
    else if (r1 == rb) winner = 1;
    else if (r0 != r1) winner = r0 > r1 ? 0 : 1;
    else return {0.0, 0.0};
    const double pot = contrib_[1 - winner];
    return winner == 0 ? std::array<double, 2>{pot, -pot} : std::array<double, 2>{-pot, pot};
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(!is_terminal(), "information_state_key: terminal state");
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    return "leduc|p" + std::to_string(player) + "|c" + std::to_string(cards_[player]) + "|b" +
           (board_ < 0 ? std::string("-") : std::to_string(board_)) + "|" + seq_[0] + "/" + seq_[1];
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(!is_terminal(), "encode: terminal state");
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    // [player(2), own card(6), board(7: none+6), round(2),
    //  raises in round 1 (3), raises in round 2 (3), facing a raise(1)]
    std::vector<double> x(24, 0.0);
    x[player] = 1.0;
    x[2 + cards_[player]] = 1.0;
    x[8 + (board_ < 0 ? 0 : 1 + board_)] = 1.0;
    x[15 + round_] = 1.0;
    x[17 + raises_[0]] = 1.0;
    x[20 + raises_[1]] = 1.0;
    x[23] = facing_raise() ? 1.0 : 0.0;
    return x;
  }

 protected:
  void do_apply(Action action) override {
    if (cards_[0] < 0) { cards_[0] = action; return; }
    if (cards_[1] < 0) { cards_[1] = action; return; }
    if (round_ == 1 && board_ < 0) { board_ = action; return; }

    if (action == kFold) {
      folded_ = to_act_;
      return;
    }
    if (action == kCall) {
      contrib_[to_act_] = contrib_[1 - to_act_];
      seq_[round_] += 'c';
      // A call closes the round unless it is the round-opening check.
      if (raises_[round_] > 0 || seq_[round_].size() > 1) {
        end_round();
      } else {
        to_act_ = 1 - to_act_;
      }
      return;
    }
    // Raise: match the outstanding bet, then add the round's raise size.
    contrib_[to_act_] = contrib_[1 - to_act_] + kRaiseSize[round_];
    raises_[round_]++;
    seq_[round_] += 'r';
    to_act_ = 1 - to_act_;
  }

 private:
  bool facing_raise() const { return contrib_[to_act_] < contrib_[1 - to_act_]; }

  void end_round() {
    round_++;
    to_act_ = 0;
  }

  std::array<int, 2> cards_ = {-1, -1};
  int board_ = -1;
  int round_ = 0;      // 0, 1, or 2 once play has finished
  int to_act_ = 0;
  int folded_ = -1;
  std::array<int, 2> raises_ = {0, 0};
  std::array<double, 2> contrib_;
  std::array<std::string, 2> seq_;
};

class LeducGame final : public Game {
 public:
  std::string id() const override { return "leduc"; }
  std::unique_ptr<State> new_initial_state() const override { return std::make_unique<LeducState>(); }
  int num_actions() const override { return 3; }
  int feature_size() const override { return 24; }
  int max_depth() const override { return 13; }
  double max_payoff() const override { return 13.0; }
};

}  // namespace

std::shared_ptr<const Game> make_leduc() { return std::make_shared<LeducGame>(); }

}  // namespace cpsro
