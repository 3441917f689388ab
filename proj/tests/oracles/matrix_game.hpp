#pragma once

// Test utility: a zero-sum matrix lifted to a one-shot two-ply tree. The
// column player commits blind to the row player's pending choice.

#include <memory>
#include <string>

#include "cpsro/game.hpp"
#include "cpsro/meta.hpp"

namespace cpsro::oracles {

class MatrixTreeState final : public State {
 public:
  explicit MatrixTreeState(const Matrix* payoff) : payoff_(payoff) {}

  std::unique_ptr<State> clone() const override { return std::make_unique<MatrixTreeState>(*this); }

  int current_player() const override {
    if (col_ >= 0) return kTerminalPlayer;
    return row_ < 0 ? 0 : 1;
  }

  std::vector<Action> legal_actions() const override {
    CPSRO_CHECK(!is_terminal(), "legal_actions: terminal");
    const int n = current_player() == 0 ? payoff_->rows : payoff_->cols;
    std::vector<Action> actions(n);
    for (int a = 0; a < n; ++a) actions[a] = a;
    return actions;
  }

  std::vector<ChanceOutcome> chance_outcomes() const override {
    throw ContractViolation("matrix tree game has no chance nodes");
  }

  std::array<double, 2> returns() const override {
    CPSRO_CHECK(is_terminal(), "returns: not terminal");
    const double v = payoff_->at(row_, col_);
    return {v, -v};
  }

  std::string information_state_key(int player) const override {
    CPSRO_CHECK(player == current_player(), "information_state_key: player not acting");
    return player == 0 ? "mtx|p0" : "mtx|p1";
  }

  std::vector<double> encode(int player) const override {
    CPSRO_CHECK(player == current_player(), "encode: player not acting");
    return player == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0};
  }

 protected:
  void do_apply(Action action) override {
    if (row_ < 0) row_ = action;
    else col_ = action;
  }

 private:
  const Matrix* payoff_;
  int row_ = -1, col_ = -1;
};

class MatrixTreeGame final : public Game {
 public:
  explicit MatrixTreeGame(Matrix payoff) : payoff_(std::move(payoff)) {}

  std::string id() const override { return "matrix_tree"; }
  std::unique_ptr<State> new_initial_state() const override {
    return std::make_unique<MatrixTreeState>(&payoff_);
  }
  int num_actions() const override { return std::max(payoff_.rows, payoff_.cols); }
  int feature_size() const override { return 2; }
  int max_depth() const override { return 2; }
  double max_payoff() const override {
    double m = 0.0;
    for (double v : payoff_.values) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Matrix payoff_;
};

}  // namespace cpsro::oracles
