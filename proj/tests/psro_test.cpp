#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpsro/config.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/psro.hpp"
#include "doctest.h"

using namespace cpsro;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "cpsro_psro_test" / leaf;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_kuhn(const std::string& variant, uint64_t seed) {
  RunConfig cfg = preset_config("kuhn-accept");
  cfg.variant = variant;
  cfg.iterations = 2;
  cfg.oracle_episodes = 300;
  cfg.episodes_per_entry = 100;
  cfg.seed = seed;
  cfg.conflux.start_iteration = 1;
  cfg.conflux.interval = 2;
  cfg.conflux.num_subs = 1;
  cfg.conflux.pool_size = 1;
  cfg.conflux.routing_episodes = 200;
  cfg.conflux.distill_episodes = 200;
  cfg.conflux.selection_states = 64;
  return cfg;
}

int count_rows(const std::filesystem::path& metrics) {
  std::ifstream in(metrics);
  std::string line;
  int rows = -1;  // skip header
  while (std::getline(in, line))
    if (!line.empty()) rows++;
  return rows;
}

}  // namespace

TEST_CASE("single iteration: populations, matrix and metrics grow together") {
  const RunConfig cfg = [&] {
    auto c = tiny_kuhn("psro", 5);
    c.iterations = 1;
    return c;
  }();
  const auto out = fresh_dir("single");
  const auto run = psro_run(cfg, out);
  CHECK(run.populations[0].size() == 2);
  CHECK(run.populations[1].size() == 2);
  CHECK(run.matrix.means.rows == 2);
  CHECK(run.matrix.means.cols == 2);
  CHECK(run.matrix.complete());
  CHECK(count_rows(out / "metrics.csv") == 1);
  CHECK(run.populations[0].members[0].tag == "uniform");
  CHECK(run.populations[0].members[1].tag == "oracle");
  // Stored meta-NE passes the matrix gate.
  CHECK(matrix_exploitability(run.matrix.means, run.sigma[0], run.sigma[1]) <= 1e-6);
}

TEST_CASE("metrics are deterministic and exploitability is non-negative") {
  const auto out_a = fresh_dir("det_a");
  const auto out_b = fresh_dir("det_b");
  psro_run(tiny_kuhn("psro", 7), out_a);
  psro_run(tiny_kuhn("psro", 7), out_b);
  const std::string bytes = read_bytes(out_a / "metrics.csv");
  CHECK(bytes == read_bytes(out_b / "metrics.csv"));
  std::stringstream ss(bytes);
  std::string line;
  std::getline(ss, line);
  CHECK(line == kMetricsHeader);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) >= 0.0);
  }
}

TEST_CASE("psd with zero diversity weight reproduces vanilla trajectories") {
  const auto out_a = fresh_dir("psd0_a");
  const auto out_b = fresh_dir("psd0_b");
  auto psd = tiny_kuhn("psd", 11);
  psd.diversity_weight = 0.0;
  psro_run(psd, out_a);
  psro_run(tiny_kuhn("psro", 11), out_b);
  CHECK(read_bytes(out_a / "metrics.csv") == read_bytes(out_b / "metrics.csv"));
}

TEST_CASE("psd with positive weight diverges from vanilla") {
  const auto out_a = fresh_dir("psd1_a");
  const auto out_b = fresh_dir("psd1_b");
  psro_run(tiny_kuhn("psd", 11), out_a);
  psro_run(tiny_kuhn("psro", 11), out_b);
  CHECK(read_bytes(out_a / "metrics.csv") != read_bytes(out_b / "metrics.csv"));
}

TEST_CASE("a run resumes from its checkpoint and extends bit-identically") {
  const auto straight = fresh_dir("resume_full");
  const auto resumed = fresh_dir("resume_split");
  auto cfg = tiny_kuhn("psro", 13);
  cfg.iterations = 3;
  psro_run(cfg, straight);

  auto first_leg = cfg;
  first_leg.iterations = 1;
  psro_run(first_leg, resumed);
  CHECK(count_rows(resumed / "metrics.csv") == 1);
  // Same config, later horizon: continues in place.
  psro_run(cfg, resumed);
  CHECK(count_rows(resumed / "metrics.csv") == 3);
  CHECK(read_bytes(straight / "metrics.csv") == read_bytes(resumed / "metrics.csv"));

  // Re-running a finished horizon is a no-op.
  psro_run(cfg, resumed);
  CHECK(read_bytes(straight / "metrics.csv") == read_bytes(resumed / "metrics.csv"));
}

TEST_CASE("a checkpoint for a different config is refused") {
  const auto out = fresh_dir("mismatch");
  psro_run(tiny_kuhn("psro", 17), out);
  auto other = tiny_kuhn("psro", 18);  // different seed
  CHECK_THROWS_AS(psro_run(other, out), ConfigError);
}

TEST_CASE("conflux variant runs its schedule and tags distilled members") {
  auto cfg = tiny_kuhn("conflux", 19);
  const auto out = fresh_dir("conflux_tiny");
  const auto run = psro_run(cfg, out);
  // start 1, interval 2 with 2 iterations: conflux at iteration 1, oracle at 2.
  CHECK(run.populations[0].members[1].tag == "conflux-distill");
  CHECK(run.populations[0].members[2].tag == "oracle");
  CHECK(run.populations[0].size() == 3);
  CHECK(run.matrix.complete());
}

TEST_CASE("oracle trained against a uniform opponent approaches the exact ceiling") {
  auto game = make_game("kuhn");
  RunConfig cfg = preset_config("kuhn-accept");
  cfg.oracle_episodes = 20000;
  Population own, opp;
  own.members.push_back(PolicySnapshot::uniform_random(0));
  opp.members.push_back(PolicySnapshot::uniform_random(0));
  const auto snapshot = train_best_response(*game, 0, own, opp, {1.0}, cfg, 1, /*seed=*/3);
  CHECK(!snapshot.state_buffer.empty());
  const UniformRandomPolicy uniform;
  const double value =
      expected_value(*game, *snapshot.as_policy(game->num_actions()), uniform);
  CHECK(value >= 0.4);
}

TEST_CASE("config validation rejects bad setups") {
  RunConfig cfg = preset_config("kuhn-accept");
  cfg.variant = "alphazero";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset_config("kuhn-accept");
  cfg.variant = "conflux";
  cfg.conflux.pool_size = 99;  // cannot exceed population size at start
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = preset_config("kuhn-accept");
  cfg.variant = "conflux";
  cfg.conflux.start_iteration = 99;  // never runs within the horizon
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Population empty;
  Population one;
  one.members.push_back(PolicySnapshot::uniform_random(0));
  auto game = make_game("kuhn");
  CHECK_THROWS_AS(train_best_response(*game, 0, one, empty, {}, preset_config("kuhn-accept"), 1, 1),
                  ConfigError);
}
