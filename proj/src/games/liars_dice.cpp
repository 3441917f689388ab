// Liar's Dice, two players with one six-sided die each. Bids (quantity, face)
// are ordered by (quantity, face); each bid must exceed the previous one and
// "liar" challenges the last bid. An incorrect challenge loses the game, a
// successful one wins it. The imperfect-recall variant keys only on the
// player's own die and the current bid.

#include <memory>
#include <string>
#include <vector>

#include "cpsro/game.hpp"
#include "games/registry.hpp"

namespace cpsro {
namespace {

constexpr int kNumFaces = 6;
constexpr int kNumBids = 2 * kNumFaces;  // quantities 1..2 of faces 1..6
constexpr Action kLiar = kNumBids;

int bid_quantity(Action bid) { return bid / kNumFaces + 1; }
int bid_face(Action bid) { return bid % kNumFaces + 1; }

class LiarsDiceState final : public State {
 public:
  explicit LiarsDiceState(bool imperfect_recall) : imperfect_recall_(imperfect_recall) {}

  std::unique_ptr<State> clone() const override { return std::make_unique<LiarsDiceState>(*this); }

  int current_player() const override {
    if (challenger_ >= 0) return kTerminalPlayer;
    if (dice_[0] < 0 || dice_[1] < 0) return kChancePlayer;
    return static_cast<int>(bids_.size()) % 2;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal() && !is_chance(), "legal_actions: not at a decision node");
    std::vector<Action> actions;
    const int last = bids_.empty() ? -1 : bids_.back();
    for (Action bid = last + 1; bid < kNumBids; ++bid) actions.push_back(bid);
    if (!bids_.empty()) actions.push_back(kLiar);
    return actions;
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    CPSRO_CHECK(is_chance(), "chance_outcomes: not at a chance node");
    std::vector<ChanceOutcome> outcomes;
    for (int face = 0; face < kNumFaces; ++face) {
      outcomes.push_back({face, 1.0 / kNumFaces});
    }
    return outcomes;
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: state not terminal");
    const Action bid = bids_.back();
    const int count = (dice_[0] + 1 == bid_face(bid) ? 1 : 0) + (dice_[1] + 1 == bid_face(bid) ? 1 : 0);
    const bool bid_holds = count >= bid_quantity(bid);
    const int winner = bid_holds ? 1 - challenger_ : challenger_;
    return winner == 0 ? std::array<double, 2>{1.0, -1.0} : std::array<double, 2>{-1.0, 1.0};
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(!is_terminal(), "information_state_key: terminal state");
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    std::string key = (imperfect_recall_ ? "ldir|p" : "ld|p") + std::to_string(player) + "|d" +
                      std::to_string(dice_[player]);
    if (imperfect_recall_) {
      key += "|cur:" + (bids_.empty() ? std::string("-") : std::to_string(bids_.back()));
    } else {
      key += "|bids:";
      for (Action bid : bids_) key += std::to_string(bid) + ",";
    }
    return key;
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(!is_terminal(), "encode: terminal state");
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    const int history_block = imperfect_recall_ ? 0 : kNumBids;
    // perfect recall:   [player(2), own die(6), bids made(12), current bid(13)]
    // imperfect recall: [player(2), own die(6), current bid(13)]
    std::vector<double> x(2 + kNumFaces + history_block + kNumBids + 1, 0.0);
    x[player] = 1.0;
    x[2 + dice_[player]] = 1.0;
    if (!imperfect_recall_) {
      for (Action bid : bids_) x[2 + kNumFaces + bid] = 1.0;
    }
    const int current = bids_.empty() ? 0 : 1 + bids_.back();
    x[2 + kNumFaces + history_block + current] = 1.0;
    return x;
  }

 protected:
  void do_apply(Action action) override {
    if (dice_[0] < 0) { dice_[0] = action; return; }
    if (dice_[1] < 0) { dice_[1] = action; return; }
    if (action == kLiar) {
      challenger_ = static_cast<int>(bids_.size()) % 2;
      return;
    }
    bids_.push_back(action);
  }

 private:
  bool imperfect_recall_;
  std::array<int, 2> dice_ = {-1, -1};  // face index 0..5
  std::vector<Action> bids_;
  int challenger_ = -1;
};

class LiarsDiceGame final : public Game {
 public:
  explicit LiarsDiceGame(bool imperfect_recall) : imperfect_recall_(imperfect_recall) {}

  std::string id() const override { return imperfect_recall_ ? "liars_dice_ir" : "liars_dice"; }
  std::unique_ptr<State> new_initial_state() const override {
    return std::make_unique<LiarsDiceState>(imperfect_recall_);
  }
  int num_actions() const override { return kNumBids + 1; }
  int feature_size() const override { return imperfect_recall_ ? 21 : 33; }
  int max_depth() const override { return 2 + kNumBids + 1; }
  double max_payoff() const override { return 1.0; }
  bool perfect_recall() const override { return !imperfect_recall_; }

 private:
  bool imperfect_recall_;
};

}  // namespace

std::shared_ptr<const Game> make_liars_dice(bool imperfect_recall) {
  return std::make_shared<LiarsDiceGame>(imperfect_recall);
}

}  // namespace cpsro
