// Kuhn poker: three cards {J, Q, K}, one dealt to each player, one betting
// round with a single bet size. Root is one chance node over the six ordered
// deals.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cpsro/game.hpp"
#include "games/registry.hpp"

namespace cpsro {
namespace {

constexpr Action kPass = 0;
constexpr Action kBet = 1;

constexpr int kNumCards = 3;

// Ordered deals (card0, card1), card0 != card1.
constexpr std::array<std::array<int, 2>, 6> kDeals = {{
    {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1},
}};

// Betting sequences with someone still to act.
bool betting_over(const std::string& seq) {
  return seq == "pp" || seq == "bp" || seq == "bb" || seq == "pbp" || seq == "pbb";
}

class KuhnState final : public State {
 public:
  std::unique_ptr<State> clone() const override { return std::make_unique<KuhnState>(*this); }

  int current_player() const override {
    if (deal_ < 0) return kChancePlayer;
    if (betting_over(seq_)) return kTerminalPlayer;
    return static_cast<int>(seq_.size()) % 2;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal() && !is_chance(), "legal_actions: not at a decision node");
    return {kPass, kBet};
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    CPSRO_CHECK(is_chance(), "chance_outcomes: not at a chance node");
    std::vector<ChanceOutcome> outcomes;
    for (int i = 0; i < static_cast<int>(kDeals.size()); ++i) {
      outcomes.push_back({i, 1.0 / kDeals.size()});
    }
    return outcomes;
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: state not terminal");
    const int winner_by_card = card(0) > card(1) ? 0 : 1;
    int winner;
    double pot;  // what the loser forfeits
    if (seq_ == "pp") {
      winner = winner_by_card;
      pot = 1.0;
    } else if (seq_ == "bp") {
      winner = 0;
      pot = 1.0;
    } else if (seq_ == "pbp") {
      winner = 1;
      pot = 1.0;
    } else {  // "bb" or "pbb": showdown with the bet called
      winner = winner_by_card;
      pot = 2.0;
    }
    return winner == 0 ? std::array<double, 2>{pot, -pot} : std::array<double, 2>{-pot, pot};
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(!is_terminal(), "information_state_key: terminal state");
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    return "kuhn|p" + std::to_string(player) + "|c" + std::to_string(card(player)) + "|" + seq_;
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(!is_terminal(), "encode: terminal state");
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    // [player(2), card(3), betting sequence(4): "", "p", "b", "pb"]
    std::vector<double> x(9, 0.0);
    x[player] = 1.0;
    x[2 + card(player)] = 1.0;
    int seq_index;
    if (seq_.empty()) seq_index = 0;
    else if (seq_ == "p") seq_index = 1;
    else if (seq_ == "b") seq_index = 2;
    else seq_index = 3;  // "pb"
    x[5 + seq_index] = 1.0;
    return x;
  }

 protected:
  void do_apply(Action action) override {
    if (deal_ < 0) {
      deal_ = action;
    } else {
      seq_ += (action == kPass ? 'p' : 'b');
    }
  }

 private:
  int card(int player) const { return kDeals[deal_][player]; }

  int deal_ = -1;
  std::string seq_;
};

class KuhnGame final : public Game {
 public:
  std::string id() const override { return "kuhn"; }
  std::unique_ptr<State> new_initial_state() const override { return std::make_unique<KuhnState>(); }
  int num_actions() const override { return 2; }
  int feature_size() const override { return 9; }
  int max_depth() const override { return 4; }
  double max_payoff() const override { return 2.0; }
};

}  // namespace

std::shared_ptr<const Game> make_kuhn() { return std::make_shared<KuhnGame>(); }

}  // namespace cpsro
