#include "cpsro/selftest.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "cpsro/config.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/game.hpp"
#include "cpsro/games/maze.hpp"
#include "cpsro/psro.hpp"

namespace cpsro {

namespace {

// Exploitability of the everyone-uniform profile in Kuhn poker, from
// exhaustive pure-strategy enumeration (frozen; re-derived by the test
// suite's enumeration oracle).
constexpr double kKuhnUniformExploitability = 0.9166666666666665;

struct Walker {
  const Game& game;
  const ReturnsTransform* corrupt;
  std::string failure;

  bool walk(const State& state, int depth) {
    if (depth > game.max_depth()) {
      failure = game.id() + ": exceeded documented max depth";
      return false;
    }
    if (state.is_terminal()) {
      auto u = state.returns();
      if (corrupt) u = (*corrupt)(u);
      if (u[0] + u[1] != 0.0) {
        failure = game.id() + ": terminal returns sum to " + std::to_string(u[0] + u[1]);
        return false;
      }
      return true;
    }
    if (state.is_chance()) {
      double total = 0.0;
      for (const auto& outcome : state.chance_outcomes()) {
        total += outcome.probability;
        if (!walk(*state.child(outcome.action), depth + 1)) return false;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        failure = game.id() + ": chance node mass " + std::to_string(total);
        return false;
      }
      return true;
    }
    for (Action a : state.legal_actions()) {
      if (!walk(*state.child(a), depth + 1)) return false;
    }
    return true;
  }
};

std::filesystem::path scratch_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "cpsro_selftest" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CheckResult check_zero_sum(const ReturnsTransform* corrupt) {
  CheckResult result{"game-zero-sum", true, ""};
  for (const char* id : {"kuhn", "leduc", "goofspiel5"}) {
    const auto game = make_game(id);
    Walker walker{*game, corrupt, ""};
    if (!walker.walk(*game->new_initial_state(), 0)) {
      result.passed = false;
      result.detail = walker.failure;
      return result;
    }
  }
  return result;
}

CheckResult check_chance_normalization() {
  // The same walker reports chance-mass violations; scoped here to the
  // chance-bearing games.
  CheckResult result{"game-chance-normalization", true, ""};
  for (const char* id : {"kuhn", "leduc", "liars_dice"}) {
    const auto game = make_game(id);
    Walker walker{*game, nullptr, ""};
    if (!walker.walk(*game->new_initial_state(), 0)) {
      result.passed = false;
      result.detail = walker.failure;
      return result;
    }
  }
  return result;
}

CheckResult check_perfect_recall() {
  CheckResult result{"game-perfect-recall", true, ""};
  for (const char* id : {"kuhn", "leduc"}) {
    auto game = make_game(id);
    std::unordered_map<std::string, std::vector<Action>> seen;
    std::array<std::vector<Action>, 2> own;
    std::function<bool(const State&)> walk = [&](const State& state) -> bool {
      if (state.is_terminal()) return true;
      if (state.is_chance()) {
        for (const auto& outcome : state.chance_outcomes()) {
          if (!walk(*state.child(outcome.action))) return false;
        }
        return true;
      }
      const int player = state.current_player();
      const auto key = state.information_state_key(player);
      auto [it, inserted] = seen.emplace(key, own[player]);
      if (!inserted && it->second != own[player]) {
        result.detail = std::string(id) + ": key does not pin down the own-action sequence";
        return false;
      }
      for (Action a : state.legal_actions()) {
        own[player].push_back(a);
        const bool ok = walk(*state.child(a));
        own[player].pop_back();
        if (!ok) return false;
      }
      return true;
    };
    if (!walk(*game->new_initial_state())) {
      result.passed = false;
      return result;
    }
  }
  return result;
}

CheckResult check_gradient() {
  CheckResult result{"nn-gradient-check", true, ""};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    QNetwork net = make_network({3, 8, 2}, rng);
    std::vector<std::vector<double>> xs;
    std::vector<TdSample> batch;
    for (int i = 0; i < 4; ++i) {
      xs.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
      batch.push_back({xs.back(), rng.uniform_int(2), 2.0 * rng.uniform() - 1.0});
    }
    const Gradients analytic = gradient(net, batch);
    // Central finite differences over every parameter.
    const double h = 1e-5;
    auto loss = [&]() {
      double total = 0.0;
      for (const auto& s : batch) {
        const double err = net.forward(s.features)[s.action] - s.td_target;
        total += err * err;
      }
      return total / batch.size();
    };
    for (int layer = 0; layer < net.num_layers(); ++layer) {
      for (size_t i = 0; i < net.weights[layer].size(); ++i) {
        const double saved = net.weights[layer][i];
        net.weights[layer][i] = saved + h;
        const double up = loss();
        net.weights[layer][i] = saved - h;
        const double down = loss();
        net.weights[layer][i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = analytic.weights[layer][i];
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        if (rel > 1e-4) {
          result.passed = false;
          result.detail = "seed " + std::to_string(seed) + ": relative error " +
                          std::to_string(rel);
          return result;
        }
      }
    }
  }
  return result;
}

CheckResult check_matrix_nash() {
  CheckResult result{"matrix-nash", true, ""};
  const Matrix pennies = {2, 2, {1, -1, -1, 1}};
  const auto p = solve_meta_nash(pennies);
  if (!p.converged || std::abs(p.row[0] - 0.5) > 1e-4) {
    return {"matrix-nash", false, "matching pennies did not mix 50/50"};
  }
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + rng.uniform_int(12);
    const int m = 1 + rng.uniform_int(12);
    Matrix payoff = Matrix::zeros(n, m);
    for (double& v : payoff.values) v = 2.0 * rng.uniform() - 1.0;
    const auto res = solve_meta_nash(payoff);
    const double expl = matrix_exploitability(payoff, res.row, res.col);
    if (!res.converged || expl > 1e-6) {
      return {"matrix-nash", false,
              "random matrix exploitability " + std::to_string(expl)};
    }
  }
  return result;
}

CheckResult check_kuhn_best_response() {
  CheckResult result{"kuhn-best-response", true, ""};
  auto game = make_game("kuhn");
  Behavioral uniform0, uniform1;
  const auto report = exploitability_behavioral(*game, uniform0, uniform1);
  if (std::abs(report.value - kKuhnUniformExploitability) > 1e-9) {
    return {"kuhn-best-response", false,
            "uniform-profile exploitability " + std::to_string(report.value)};
  }
  return result;
}

CheckResult check_maze_fixture() {
  CheckResult result{"maze-fixture", true, ""};
  auto game = make_game("maze");
  auto play = [&](const std::string& human) {
    auto state = game->new_initial_state();
    while (!state->is_terminal()) {
      const std::string& script = state->current_player() == 0 ? human : "monster";
      state->apply_action(maze::scripted_action(script, *state));
    }
    return state->returns()[0];
  };
  if (play("pi1") != -1.0) return {"maze-fixture", false, "pi1 alone should be captured"};
  if (play("pi2") != -1.0) return {"maze-fixture", false, "pi2 alone should be captured"};
  if (play("switch") != 1.0) return {"maze-fixture", false, "the switch route should win"};
  return result;
}

CheckResult check_run_determinism() {
  CheckResult result{"run-determinism", true, ""};
  RunConfig config = preset_config("kuhn-accept");
  config.iterations = 1;
  config.oracle_episodes = 200;
  config.episodes_per_entry = 50;
  config.seed = 12345;
  const auto dir_a = scratch_dir("det_a");
  const auto dir_b = scratch_dir("det_b");
  psro_run(config, dir_a);
  psro_run(config, dir_b);
  const std::string a = read_file(dir_a / "metrics.csv");
  const std::string b = read_file(dir_b / "metrics.csv");
  if (a.empty() || a != b) {
    return {"run-determinism", false, "same-seed runs disagree on metrics.csv"};
  }
  return result;
}

std::vector<CheckResult> run_selftest() {
  return {check_zero_sum(),          check_chance_normalization(), check_perfect_recall(),
          check_gradient(),          check_matrix_nash(),          check_kuhn_best_response(),
          check_maze_fixture(),      check_run_determinism()};
}

}  // namespace cpsro
