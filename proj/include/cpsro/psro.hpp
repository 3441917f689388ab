#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "cpsro/conflux.hpp"
#include "cpsro/dqn.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/meta.hpp"
#include "cpsro/population.hpp"

namespace cpsro {

struct RunConfig {
  std::string game_id = "kuhn";
  std::string variant = "psro";  // psro | psd | conflux
  int iterations = 15;
  int oracle_episodes = 5000;    // E, per best-response training
  double diversity_weight = 1.0; // psd shaping weight (lambda)
  DqnHyper dqn;
  ConfluxConfig conflux;
  int episodes_per_entry = 1000;
  int state_buffer_capacity = 10000;
  uint64_t seed = 1;
  // Exploitability column: exact tree traversal when the game supports it,
  // a trained-exploiter estimate otherwise ("auto"), or forced either way.
  std::string exploit_metric = "auto";  // auto | exact | approx
  int approx_exploit_episodes = 0;      // 0 -> oracle_episodes
  int h2h_episodes = 1000;
  // Off by default: wallclock in the metrics CSV breaks byte-for-byte
  // reproducibility across runs, so the column holds 0 unless enabled.
  bool record_wallclock = false;

  void validate() const;
};

struct PsroRun {
  std::array<Population, 2> populations;
  PayoffMatrix matrix;
  std::array<MetaStrategy, 2> sigma;
  int completed_iterations = 0;
  std::filesystem::path out_dir;
};

inline constexpr const char* kMetricsHeader =
    "iteration,cumulative_episodes,exploitability,br_utility_p0,br_utility_p1,wallclock_s";

// One best-response oracle: fresh DQN trained for E episodes against the
// opponent meta-NE mixture; under the psd variant the per-step reward adds
// diversity_weight times the minimum KL distance to the player's own
// population.
PolicySnapshot train_best_response(const Game& game, int player, const Population& own_pop,
                                   const Population& opp_pop, const MetaStrategy& opp_sigma,
                                   const RunConfig& config, int iteration, uint64_t seed);

// Full outer loop: populations start from one uniform-random policy each;
// every iteration trains both players' oracles against the previous
// meta-NE (or runs the conflux pipeline on its schedule), refills the payoff
// matrix, re-solves the meta-NE, records a metrics row, and checkpoints.
// Runs resume from a compatible checkpoint in out_dir.
PsroRun psro_run(const RunConfig& config, const std::filesystem::path& out_dir);

// Exploitability of the run's current meta-NE profile per the config's
// exploit_metric.
ExploitabilityReport run_exploitability(const Game& game, const std::array<Population, 2>& pops,
                                        const std::array<MetaStrategy, 2>& sigma,
                                        const RunConfig& config, uint64_t seed);

}  // namespace cpsro
