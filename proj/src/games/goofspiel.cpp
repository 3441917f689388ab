// Goofspiel with N point cards, prizes auctioned in descending order
// (N, N-1, ..., 1). Simultaneous bids are serialized: player 0 commits first
// and player 1 bids blind to that pending choice; both bids become public
// once the round resolves. Tied bids discard the prize. Terminal utility is
// the win/loss sign of the final point difference.

#include <memory>
#include <string>
#include <vector>

#include "cpsro/game.hpp"
#include "games/registry.hpp"

namespace cpsro {
namespace {

class GoofspielState final : public State {
 public:
  explicit GoofspielState(int num_cards) : n_(num_cards), hands_{(1 << num_cards) - 1, (1 << num_cards) - 1} {}

  std::unique_ptr<State> clone() const override { return std::make_unique<GoofspielState>(*this); }

  int current_player() const override {
    if (round_ == n_) return kTerminalPlayer;
    return pending_ < 0 ? 0 : 1;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal(), "legal_actions: terminal state");
    const int hand = hands_[current_player()];
    std::vector<Action> actions;
    for (int card = 0; card < n_; ++card) {
      if (hand & (1 << card)) actions.push_back(card);
    }
    return actions;
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    throw ContractViolation("chance_outcomes: goofspiel has no chance nodes");
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: state not terminal");
    const int diff = points_[0] - points_[1];
    if (diff > 0) return {1.0, -1.0};
    if (diff < 0) return {-1.0, 1.0};
    return {0.0, 0.0};
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(!is_terminal(), "information_state_key: terminal state");
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    // Resolved bids are public; player 1 acting mid-round must not see
    // player 0's pending bid, so the key carries resolved rounds only.
    std::string key = "g" + std::to_string(n_) + "|p" + std::to_string(player) + "|me:";
    for (int r = 0; r < round_; ++r) key += std::to_string(bids_[player][r]) + ",";
    key += "|opp:";
    for (int r = 0; r < round_; ++r) key += std::to_string(bids_[1 - player][r]) + ",";
    return key;
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(!is_terminal(), "encode: terminal state");
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    // [player(2), own hand(n), opponent hand(n), round(n), point diff / max(1)]
    std::vector<double> x(2 + 3 * n_ + 1, 0.0);
    x[player] = 1.0;
    for (int card = 0; card < n_; ++card) {
      if (hands_[player] & (1 << card)) x[2 + card] = 1.0;
      if (hands_[1 - player] & (1 << card)) x[2 + n_ + card] = 1.0;
    }
    x[2 + 2 * n_ + round_] = 1.0;
    const double max_points = n_ * (n_ + 1) / 2.0;
    x[2 + 3 * n_] = (points_[player] - points_[1 - player]) / max_points;
    return x;
  }

 protected:
  void do_apply(Action action) override {
    if (pending_ < 0) {
      pending_ = action;
      return;
    }
    const int prize = n_ - round_;  // descending: N, N-1, ..., 1
    bids_[0][round_] = pending_;
    bids_[1][round_] = action;
    hands_[0] &= ~(1 << pending_);
    hands_[1] &= ~(1 << action);
    if (pending_ > action) points_[0] += prize;
    else if (action > pending_) points_[1] += prize;
    pending_ = -1;
    round_++;
  }

 private:
  int n_;
  std::array<int, 2> hands_;
  std::array<std::array<int, 16>, 2> bids_ = {};
  std::array<int, 2> points_ = {0, 0};
  int round_ = 0;
  int pending_ = -1;  // player 0's committed bid within the current round
};

class GoofspielGame final : public Game {
 public:
  explicit GoofspielGame(int num_cards) : n_(num_cards) {
    if (n_ < 2 || n_ > 16) throw ConfigError("goofspiel: card count out of range");
  }

  std::string id() const override { return "goofspiel" + std::to_string(n_); }
  std::unique_ptr<State> new_initial_state() const override {
    return std::make_unique<GoofspielState>(n_);
  }
  int num_actions() const override { return n_; }
  int feature_size() const override { return 2 + 3 * n_ + 1; }
  int max_depth() const override { return 2 * n_; }
  double max_payoff() const override { return 1.0; }
  // Win/loss games are conventionally reported on [0,1].
  double report_scale(double utility) const override { return (utility + 1.0) / 2.0; }

 private:
  int n_;
};

}  // namespace

std::shared_ptr<const Game> make_goofspiel(int num_cards) {
  return std::make_shared<GoofspielGame>(num_cards);
}

}  // namespace cpsro
