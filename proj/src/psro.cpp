#include "cpsro/psro.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cpsro/config.hpp"
#include "cpsro/error.hpp"
#include "json.hpp"

namespace cpsro {

namespace {

constexpr uint64_t kOracleStream = 0x6f7261636cULL;
constexpr uint64_t kStatesStream = 0x73746174ULL;
constexpr uint64_t kRoutingStream = 0x726f7574ULL;
constexpr uint64_t kDistillStream = 0x64697374ULL;
constexpr uint64_t kExploitStream = 0x6578706cULL;
constexpr uint64_t kH2hStream = 0x683268ULL;

std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Config text without the iterations line: a checkpoint stays compatible
// when a run is extended to more iterations.
std::string strip_iterations(const std::string& config_text) {
  std::string out;
  std::stringstream ss(config_text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("iterations =", 0) == 0) continue;
    out += line;
    out += "\n";
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (variant != "psro" && variant != "psd" && variant != "conflux") {
    throw ConfigError("run: unknown variant '" + variant + "'");
  }
  if (iterations < 1) throw ConfigError("run: iterations must be >= 1");
  if (oracle_episodes < 1) throw ConfigError("run: oracle episodes must be >= 1");
  if (diversity_weight < 0.0) throw ConfigError("run: diversity weight must be >= 0");
  if (episodes_per_entry < 1) throw ConfigError("run: episodes per entry must be >= 1");
  if (state_buffer_capacity < 1) throw ConfigError("run: state buffer capacity must be >= 1");
  if (exploit_metric != "auto" && exploit_metric != "exact" && exploit_metric != "approx") {
    throw ConfigError("run: unknown exploit metric '" + exploit_metric + "'");
  }
  if (approx_exploit_episodes < 0) throw ConfigError("run: approx exploit episodes must be >= 0");
  if (h2h_episodes < 1) throw ConfigError("run: head-to-head episodes must be >= 1");
  dqn.validate();
  if (variant == "conflux") {
    // Population size at the start of iteration t is t (the uniform seed
    // policy plus t-1 additions).
    conflux.validate(conflux.start_iteration);
    if (conflux.start_iteration > iterations) {
      throw ConfigError("run: conflux never starts within the configured iterations");
    }
  }
}

PolicySnapshot train_best_response(const Game& game, int player, const Population& own_pop,
                                   const Population& opp_pop, const MetaStrategy& opp_sigma,
                                   const RunConfig& config, int iteration, uint64_t seed) {
  if (opp_pop.size() == 0) throw ConfigError("train_best_response: empty opponent population");
  OpponentMixture opponents{opp_pop.policies(game.num_actions()),
                            {opp_sigma.begin(), opp_sigma.end()}};

  StepShaper shaper;
  const bool psd = config.variant == "psd" && config.diversity_weight > 0.0;
  std::vector<PolicyRef> own_policies;
  if (psd) {
    own_policies = own_pop.policies(game.num_actions());
    const double tau = config.dqn.kl_temperature;
    const double lambda = config.diversity_weight;
    shaper = [&own_policies, tau, lambda](const QNetwork& net, const StateSample& s) {
      const auto dist = policy_distribution(net, s.features, s.legal, tau);
      double min_kl = std::numeric_limits<double>::infinity();
      for (const auto& member : own_policies) {
        min_kl = std::min(min_kl, kl_divergence(dist, member->distribution(s, tau)));
      }
      return lambda * min_kl;
    };
  }

  auto oracle = train_oracle(game, player, opponents, config.dqn, config.oracle_episodes, seed,
                             psd ? &shaper : nullptr, config.state_buffer_capacity);
  return PolicySnapshot::from_net(std::move(oracle.net),
                                  config.variant == "psd" ? "psd-oracle" : "oracle", iteration,
                                  std::move(oracle.visited));
}

ExploitabilityReport run_exploitability(const Game& game, const std::array<Population, 2>& pops,
                                        const std::array<MetaStrategy, 2>& sigma,
                                        const RunConfig& config, uint64_t seed) {
  MixedProfile profile;
  for (int p = 0; p < 2; ++p) {
    profile.policies[p] = pops[p].policies(game.num_actions());
    profile.sigma[p] = sigma[p];
  }
  const bool want_exact = config.exploit_metric != "approx";
  if (want_exact && game.perfect_recall()) {
    try {
      return exploitability(game, profile);
    } catch (const CapacityError&) {
      if (config.exploit_metric == "exact") throw;
    }
  } else if (config.exploit_metric == "exact") {
    // Force the contract error for imperfect-recall games.
    return exploitability(game, profile);
  }
  const int episodes =
      config.approx_exploit_episodes > 0 ? config.approx_exploit_episodes : config.oracle_episodes;
  return approx_exploitability(game, profile, config.dqn, episodes, seed);
}

namespace {

struct ConfluxOutcome {
  PolicySnapshot snapshot;
  std::vector<int> selected;
};

ConfluxOutcome conflux_iteration(const Game& game, int player,
                                 const std::array<Population, 2>& pops,
                                 const std::array<MetaStrategy, 2>& sigma,
                                 const RunConfig& config, int iteration) {
  const auto& cc = config.conflux;
  const Population& own = pops[player];
  const Population& opp = pops[1 - player];
  if (cc.pool_size > own.size()) {
    throw ConfigError("conflux: selected pool exceeds the current population size");
  }

  Rng state_rng(derive_seed(config.seed, {kStatesStream, static_cast<uint64_t>(iteration),
                                          static_cast<uint64_t>(player)}));
  const auto states =
      gather_selection_states(game, own, sigma[player], opp, sigma[1 - player], player,
                              cc.selection_states, state_rng);
  const auto selected = select_sub_policies(own, sigma[player], cc.pool_size, cc.num_subs, states,
                                            cc.kl_temperature, game.num_actions());

  std::vector<PolicySnapshot> subs;
  for (int index : selected) subs.push_back(own.members[index].deep_copy());

  auto cross = train_routing(game, player, std::move(subs), own, cc, config.dqn,
                             derive_seed(config.seed, {kRoutingStream,
                                                       static_cast<uint64_t>(iteration),
                                                       static_cast<uint64_t>(player)}));
  cross.routing.provenance = selected;

  auto snapshot = distill(game, player, cross.routing, own, opp, sigma[1 - player], cc, config.dqn,
                          iteration,
                          derive_seed(config.seed, {kDistillStream,
                                                    static_cast<uint64_t>(iteration),
                                                    static_cast<uint64_t>(player)}),
                          config.state_buffer_capacity);
  return {std::move(snapshot), selected};
}

void save_checkpoint(const std::filesystem::path& ckpt, const std::array<Population, 2>& pops,
                     const PayoffMatrix& matrix, const std::array<MetaStrategy, 2>& sigma,
                     int completed_iterations, int64_t cumulative_episodes) {
  std::filesystem::create_directories(ckpt);
  save_population(ckpt, pops[0], 0);
  save_population(ckpt, pops[1], 1);
  save_matrix_csv(ckpt / "matrix.csv", matrix.means);
  save_counts_csv(ckpt / "matrix_counts.csv", matrix);
  save_vector_csv(ckpt / "sigma0.csv", sigma[0]);
  save_vector_csv(ckpt / "sigma1.csv", sigma[1]);
  nlohmann::json state = {{"completed_iterations", completed_iterations},
                          {"cumulative_episodes", cumulative_episodes},
                          {"format_version", 1}};
  std::ofstream out(ckpt / "state.json");
  out << state.dump(1);
}

}  // namespace

PsroRun psro_run(const RunConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const auto game = make_game(config.game_id);
  const auto ckpt = out_dir / "ckpt";
  const auto metrics_path = out_dir / "metrics.csv";
  const auto config_path = out_dir / "config.cfg";
  std::filesystem::create_directories(out_dir);

  PsroRun run;
  run.out_dir = out_dir;
  int64_t cumulative_episodes = 0;

  const std::string config_text = serialize_config(config);
  if (std::filesystem::exists(ckpt / "state.json")) {
    // Resume: the stored config must match exactly.
    std::ifstream cfg_in(config_path);
    std::string stored((std::istreambuf_iterator<char>(cfg_in)),
                       std::istreambuf_iterator<char>());
    if (strip_iterations(stored) != strip_iterations(config_text)) {
      throw ConfigError("psro_run: out dir holds a checkpoint for a different config");
    }
    if (stored != config_text) {
      std::ofstream cfg_out(config_path);
      cfg_out << config_text;
    }
    std::ifstream state_in(ckpt / "state.json");
    const auto state = nlohmann::json::parse(state_in);
    if (state.at("format_version").get<int>() != 1) {
      throw ConfigError("psro_run: unsupported checkpoint version");
    }
    run.completed_iterations = state.at("completed_iterations").get<int>();
    cumulative_episodes = state.at("cumulative_episodes").get<int64_t>();
    run.populations[0] = load_population(ckpt, 0);
    run.populations[1] = load_population(ckpt, 1);
    run.matrix.means = load_matrix_csv(ckpt / "matrix.csv");
    run.matrix.counts.assign(static_cast<size_t>(run.matrix.means.rows) * run.matrix.means.cols, 0);
    load_counts_csv(ckpt / "matrix_counts.csv", run.matrix);
    run.sigma[0] = load_vector_csv(ckpt / "sigma0.csv");
    run.sigma[1] = load_vector_csv(ckpt / "sigma1.csv");
  } else {
    // Fresh run: one uniform-random policy per player, 1x1 matrix, uniform
    // meta-NE.
    std::ofstream cfg_out(config_path);
    cfg_out << config_text;
    run.populations[0].members.push_back(PolicySnapshot::uniform_random(0));
    run.populations[1].members.push_back(PolicySnapshot::uniform_random(0));
    run.matrix = PayoffMatrix::empty(1, 1);
    fill_missing(run.matrix, *game, run.populations[0].policies(game->num_actions()),
                 run.populations[1].policies(game->num_actions()), config.episodes_per_entry,
                 config.seed);
    const auto nash = solve_meta_nash(run.matrix.means);
    run.sigma = {nash.row, nash.col};
    run.completed_iterations = 0;
    std::ofstream metrics_out(metrics_path);
    metrics_out << kMetricsHeader << "\n";
    save_checkpoint(ckpt, run.populations, run.matrix, run.sigma, 0, 0);
  }

  std::ofstream metrics_out(metrics_path, std::ios::app);
  for (int iteration = run.completed_iterations + 1; iteration <= config.iterations; ++iteration) {
    const auto started = std::chrono::steady_clock::now();
    const std::array<MetaStrategy, 2> sigma_prev = run.sigma;

    const bool conflux_now =
        config.variant == "conflux" && conflux_should_run(iteration, config.conflux);

    std::array<PolicySnapshot, 2> additions;
    for (int player = 0; player < 2; ++player) {
      if (conflux_now) {
        additions[player] =
            conflux_iteration(*game, player, run.populations, sigma_prev, config, iteration)
                .snapshot;
        cumulative_episodes += 2LL * config.conflux.routing_episodes;  // exploiter + router
        cumulative_episodes += config.conflux.distill_episodes;
      } else {
        additions[player] = train_best_response(
            *game, player, run.populations[player], run.populations[1 - player],
            sigma_prev[1 - player], config, iteration,
            derive_seed(config.seed, {kOracleStream, static_cast<uint64_t>(iteration),
                                      static_cast<uint64_t>(player)}));
        cumulative_episodes += config.oracle_episodes;
      }
    }
    run.populations[0].members.push_back(std::move(additions[0]));
    run.populations[1].members.push_back(std::move(additions[1]));

    run.matrix.grow(run.populations[0].size(), run.populations[1].size());
    fill_missing(run.matrix, *game, run.populations[0].policies(game->num_actions()),
                 run.populations[1].policies(game->num_actions()), config.episodes_per_entry,
                 config.seed);

    const auto nash = solve_meta_nash(run.matrix.means);
    run.sigma = {nash.row, nash.col};

    const auto exploit = run_exploitability(
        *game, run.populations, run.sigma, config,
        derive_seed(config.seed, {kExploitStream, static_cast<uint64_t>(iteration)}));

    // Utility of each newly added policy against the meta-NE it answered.
    std::array<double, 2> br_utility = {0.0, 0.0};
    for (int player = 0; player < 2; ++player) {
      const auto& snapshot = run.populations[player].members.back();
      const auto policy = snapshot.as_policy(game->num_actions());
      // Opponent mixture the oracle answered: the previous population prefix.
      std::vector<PolicyRef> opp_policies;
      for (size_t k = 0; k < sigma_prev[1 - player].size(); ++k) {
        opp_policies.push_back(
            run.populations[1 - player].members[k].as_policy(game->num_actions()));
      }
      try {
        br_utility[player] = expected_value_vs_mixture(*game, *policy, player, opp_policies,
                                                       sigma_prev[1 - player]);
      } catch (const CapacityError&) {
        Rng rng(derive_seed(config.seed, {kH2hStream, static_cast<uint64_t>(iteration),
                                          static_cast<uint64_t>(player)}));
        br_utility[player] = head_to_head(*game, *policy, player, opp_policies,
                                          sigma_prev[1 - player], config.h2h_episodes, rng)
                                 .mean;
      }
    }

    double wallclock = 0.0;
    if (config.record_wallclock) {
      wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    char wall_buf[32];
    std::snprintf(wall_buf, sizeof(wall_buf), "%.3f", wallclock);
    metrics_out << iteration << "," << cumulative_episodes << "," << format_metric(exploit.value)
                << "," << format_metric(br_utility[0]) << "," << format_metric(br_utility[1])
                << "," << wall_buf << "\n";
    metrics_out.flush();

    run.completed_iterations = iteration;
    save_checkpoint(ckpt, run.populations, run.matrix, run.sigma, iteration, cumulative_episodes);
  }

  return run;
}

}  // namespace cpsro
