#include <cmath>

#include "cpsro/games/maze.hpp"
#include "cpsro/meta.hpp"
#include "cpsro/policy.hpp"
#include "doctest.h"
#include "oracles/support_enum.hpp"

using namespace cpsro;

namespace {

Matrix from_rows(std::vector<std::vector<double>> rows) {
  Matrix m = Matrix::zeros(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
  return m;
}

const Matrix kMatchingPennies = from_rows({{1, -1}, {-1, 1}});
const Matrix kRps = from_rows({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});

}  // namespace

TEST_CASE("matrix exploitability: equilibria score zero, pure pennies scores 2") {
  CHECK(matrix_exploitability(kMatchingPennies, {0.5, 0.5}, {0.5, 0.5}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  const MetaStrategy third = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(matrix_exploitability(kRps, third, third) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(matrix_exploitability(kMatchingPennies, {1, 0}, {1, 0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(matrix_exploitability(kRps, {0.5, 0.5}, third), ContractViolation);
}

TEST_CASE("meta nash: matching pennies mixes 50/50") {
  const NashResult res = solve_meta_nash(kMatchingPennies);
  CHECK(res.converged);
  CHECK(res.row[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(res.col[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(matrix_exploitability(kMatchingPennies, res.row, res.col) <= 1e-6);
}

TEST_CASE("meta nash: dominant row gets all the mass") {
  const NashResult res = solve_meta_nash(from_rows({{1, 1}, {0, 0}}));
  CHECK(res.converged);
  CHECK(res.row[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("meta nash: rock-paper-scissors is uniform") {
  const NashResult res = solve_meta_nash(kRps);
  CHECK(res.converged);
  const auto oracle = oracles::support_enumeration_zero_sum(kRps);
  REQUIRE(oracle.found);
  CHECK(oracle.value == doctest::Approx(0.0).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) {
    CHECK(res.row[i] == doctest::Approx(1.0 / 3).epsilon(1e-4));
    CHECK(res.col[i] == doctest::Approx(1.0 / 3).epsilon(1e-4));
    CHECK(oracle.row[i] == doctest::Approx(1.0 / 3).epsilon(1e-7));
  }
}

TEST_CASE("meta nash solves random matrices to 1e-6 and matches the oracle value") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + rng.uniform_int(20);
    const int m = 1 + rng.uniform_int(20);
    Matrix payoff = Matrix::zeros(n, m);
    for (double& v : payoff.values) v = 2.0 * rng.uniform() - 1.0;
    const NashResult res = solve_meta_nash(payoff);
    CHECK(res.converged);
    CHECK(matrix_exploitability(payoff, res.row, res.col) <= 1e-6);
    if (n <= 4 && m <= 4) {
      const auto oracle = oracles::support_enumeration_zero_sum(payoff);
      REQUIRE(oracle.found);
      double value = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) value += res.row[r] * payoff.at(r, c) * res.col[c];
      CHECK(value == doctest::Approx(oracle.value).epsilon(1e-5));
    }
  }
}

TEST_CASE("payoff matrix growth keeps entries and flags new ones missing") {
  PayoffMatrix m = PayoffMatrix::empty(1, 1);
  m.means.at(0, 0) = 0.75;
  m.count(0, 0) = 10;
  m.grow(2, 2);
  CHECK(m.means.at(0, 0) == 0.75);
  CHECK(m.count(0, 0) == 10);
  CHECK(m.count(1, 1) == 0);
  CHECK(!m.complete());
}

TEST_CASE("fill_missing: deterministic matchup gives the single-playout value") {
  auto game = make_game("maze");
  std::vector<PolicyRef> humans = {std::make_shared<ScriptedPolicy>("pi1", game->num_actions()),
                                   std::make_shared<ScriptedPolicy>("switch", game->num_actions())};
  std::vector<PolicyRef> monsters = {
      std::make_shared<ScriptedPolicy>("monster", game->num_actions())};
  PayoffMatrix a = PayoffMatrix::empty(2, 1);
  PayoffMatrix b = PayoffMatrix::empty(2, 1);
  fill_missing(a, *game, humans, monsters, 1, /*seed=*/1);
  fill_missing(b, *game, humans, monsters, 50, /*seed=*/99);
  CHECK(a.means.at(0, 0) == -1.0);  // pi1 is captured
  CHECK(a.means.at(1, 0) == 1.0);   // the switch reaches the shelter
  CHECK(a.means.values == b.means.values);
}

TEST_CASE("fill_missing: symmetric self-play sits at zero within monte-carlo error") {
  auto game = make_game("goofspiel5");
  std::vector<PolicyRef> pop = {std::make_shared<UniformRandomPolicy>()};
  PayoffMatrix m = PayoffMatrix::empty(1, 1);
  const int episodes = 400;
  fill_missing(m, *game, pop, pop, episodes, /*seed=*/7);
  CHECK(std::abs(m.means.at(0, 0)) <= 3.0 / std::sqrt(static_cast<double>(episodes)));
}

TEST_CASE("fill_missing is idempotent on complete matrices") {
  auto game = make_game("goofspiel5");
  std::vector<PolicyRef> pop = {std::make_shared<UniformRandomPolicy>()};
  PayoffMatrix m = PayoffMatrix::empty(1, 1);
  fill_missing(m, *game, pop, pop, 100, /*seed=*/3);
  const double before = m.means.at(0, 0);
  fill_missing(m, *game, pop, pop, 100, /*seed=*/999);
  CHECK(m.means.at(0, 0) == before);
  CHECK(m.count(0, 0) == 100);
}

TEST_CASE("matrix and vector csv round-trips") {
  const auto dir = std::filesystem::temp_directory_path();
  const Matrix m = from_rows({{0.123456789012345, -1}, {2, 3.5}});
  save_matrix_csv(dir / "m.csv", m);
  const Matrix loaded = load_matrix_csv(dir / "m.csv");
  CHECK(loaded.values == m.values);
  const std::vector<double> v = {0.25, 0.75};
  save_vector_csv(dir / "v.csv", v);
  CHECK(load_vector_csv(dir / "v.csv") == v);
  std::filesystem::remove(dir / "m.csv");
  std::filesystem::remove(dir / "v.csv");
}
