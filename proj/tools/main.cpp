// Command-line front end: run experiments, evaluate checkpoints, plot
// metrics curves, and run the fast invariant suite.
//
// Exit codes: 0 success, 1 usage error, 2 failed check, 3 capacity error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cpsro/config.hpp"
#include "cpsro/conflux.hpp"
#include "cpsro/error.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/psro.hpp"
#include "cpsro/selftest.hpp"
#include "cpsro/svg.hpp"

namespace {

using namespace cpsro;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitCapacity = 3;

std::filesystem::path default_out_root() {
  if (const char* env = std::getenv("CPSRO_OUT_DIR")) return env;
  return "runs";
}

RunConfig resolve_config(const std::string& preset, const std::string& config_path,
                         const std::vector<std::string>& overrides) {
  if (preset.empty() == config_path.empty()) {
    throw ConfigError("run: give exactly one of --preset or --config");
  }
  RunConfig config = preset.empty() ? load_config_file(config_path) : preset_config(preset);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
    apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

int cmd_run(const std::string& preset, const std::string& config_path,
            const std::vector<std::string>& overrides, std::string out_dir) {
  RunConfig config = resolve_config(preset, config_path, overrides);
  config.validate();
  if (out_dir.empty()) {
    const std::string stem = preset.empty() ? std::filesystem::path(config_path).stem().string()
                                            : preset;
    out_dir = (default_out_root() /
               (stem + "-" + config.variant + "-seed" + std::to_string(config.seed)))
                  .string();
  }
  const PsroRun run = psro_run(config, out_dir);
  std::cout << "run complete: " << run.completed_iterations << " iterations, metrics at "
            << (run.out_dir / "metrics.csv").string() << "\n";
  return kExitOk;
}

struct LoadedRun {
  RunConfig config;
  std::shared_ptr<const Game> game;
  std::array<Population, 2> pops;
  PayoffMatrix matrix;
  std::array<MetaStrategy, 2> sigma;
};

LoadedRun load_run(const std::filesystem::path& dir) {
  const auto ckpt = dir / "ckpt";
  if (!std::filesystem::exists(ckpt / "state.json")) {
    throw ConfigError("eval: no checkpoint under " + dir.string());
  }
  LoadedRun run;
  run.config = load_config_file(dir / "config.cfg");
  run.game = make_game(run.config.game_id);
  run.pops[0] = load_population(ckpt, 0);
  run.pops[1] = load_population(ckpt, 1);
  run.matrix.means = load_matrix_csv(ckpt / "matrix.csv");
  run.matrix.counts.assign(static_cast<size_t>(run.matrix.means.rows) * run.matrix.means.cols, 0);
  load_counts_csv(ckpt / "matrix_counts.csv", run.matrix);
  run.sigma[0] = load_vector_csv(ckpt / "sigma0.csv");
  run.sigma[1] = load_vector_csv(ckpt / "sigma1.csv");
  return run;
}

Matrix leading_submatrix(const Matrix& m, int size) {
  Matrix sub = Matrix::zeros(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) sub.at(r, c) = m.at(r, c);
  return sub;
}

void append_report_row(const std::filesystem::path& path, const std::string& header,
                       const std::string& row) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (fresh) out << header << "\n";
  out << row << "\n";
}

int cmd_eval_exploit(const LoadedRun& run, const std::filesystem::path& dir, bool approx,
                     int episodes, uint64_t seed) {
  MixedProfile profile;
  for (int p = 0; p < 2; ++p) {
    profile.policies[p] = run.pops[p].policies(run.game->num_actions());
    profile.sigma[p] = run.sigma[p];
  }
  ExploitabilityReport report;
  if (approx) {
    const int budget = episodes > 0 ? episodes
                       : run.config.approx_exploit_episodes > 0
                           ? run.config.approx_exploit_episodes
                           : run.config.oracle_episodes;
    report = approx_exploitability(*run.game, profile, run.config.dqn, budget, seed);
  } else {
    report = exploitability(*run.game, profile);
  }
  const char* tag = report.approximate ? "approximate" : "exact";
  std::cout << "exploitability " << report.value << " (" << tag << "), br_p0 "
            << report.br_values[0] << ", br_p1 " << report.br_values[1] << "\n";
  char row[256];
  std::snprintf(row, sizeof(row), "%s,%.12g,%.12g,%.12g", tag, report.value,
                report.br_values[0], report.br_values[1]);
  append_report_row(dir / "report.csv", "mode,exploitability,br_p0,br_p1", row);
  return kExitOk;
}

int cmd_eval_h2h(const LoadedRun& run, const std::filesystem::path& dir, int episodes,
                 uint64_t seed, bool compare_conflux, int br_episodes) {
  const int num_actions = run.game->num_actions();
  const int total = run.pops[0].size();
  const int eval_episodes = episodes > 0 ? episodes : run.config.h2h_episodes;
  const auto out_path = dir / "h2h.csv";
  std::ofstream out(out_path);
  out << "iteration,player,kind,utility,stderr,utility_report_scale\n";

  auto emit = [&](int iteration, int player, const std::string& kind, Utility u) {
    char row[256];
    std::snprintf(row, sizeof(row), "%d,%d,%s,%.12g,%.12g,%.12g", iteration, player, kind.c_str(),
                  u.mean, u.stderr_, run.game->report_scale(u.mean));
    out << row << "\n";
    std::cout << row << "\n";
  };

  for (int t = 1; t < total; ++t) {
    // Meta-NE the iteration-t policies answered: the leading t x t restricted
    // game.
    const auto nash = solve_meta_nash(leading_submatrix(run.matrix.means, t));
    const std::array<MetaStrategy, 2> sigma_prev = {nash.row, nash.col};
    for (int player = 0; player < 2; ++player) {
      std::vector<PolicyRef> opponents;
      for (int k = 0; k < t; ++k) {
        opponents.push_back(run.pops[1 - player].members[k].as_policy(num_actions));
      }
      const auto& snapshot = run.pops[player].members[t];
      Rng rng(derive_seed(seed, {0x6832ULL, static_cast<uint64_t>(t),
                                 static_cast<uint64_t>(player)}));
      const auto u = head_to_head(*run.game, *snapshot.as_policy(num_actions), player, opponents,
                                  sigma_prev[1 - player], eval_episodes, rng);
      emit(t, player, snapshot.tag, u);

      if (compare_conflux) {
        // One conflux application on the population prefix, against the same
        // meta-NE: standard oracle vs routing policy vs its distillation.
        std::array<Population, 2> prefix;
        for (int p = 0; p < 2; ++p) {
          prefix[p].members.assign(run.pops[p].members.begin(), run.pops[p].members.begin() + t);
        }
        if (run.config.conflux.pool_size > prefix[player].size()) continue;
        RunConfig cfg = run.config;
        if (br_episodes > 0) {
          cfg.oracle_episodes = br_episodes;
          cfg.conflux.routing_episodes = br_episodes;
          cfg.conflux.distill_episodes = br_episodes;
        }
        const uint64_t stream = derive_seed(seed, {0xcfc0ULL, static_cast<uint64_t>(t),
                                                   static_cast<uint64_t>(player)});
        RunConfig std_cfg = cfg;
        std_cfg.variant = "psro";
        const auto standard =
            train_best_response(*run.game, player, prefix[player], prefix[1 - player],
                                sigma_prev[1 - player], std_cfg, t, stream);
        Rng rng_std(derive_seed(stream, {1}));
        emit(t, player, "standard-br",
             head_to_head(*run.game, *standard.as_policy(num_actions), player, opponents,
                          sigma_prev[1 - player], eval_episodes, rng_std));

        Rng state_rng(derive_seed(stream, {2}));
        const auto states = gather_selection_states(*run.game, prefix[player], sigma_prev[player],
                                                    prefix[1 - player], sigma_prev[1 - player],
                                                    player, cfg.conflux.selection_states,
                                                    state_rng);
        const auto selected =
            select_sub_policies(prefix[player], sigma_prev[player], cfg.conflux.pool_size,
                                cfg.conflux.num_subs, states, cfg.conflux.kl_temperature,
                                num_actions);
        std::vector<PolicySnapshot> subs;
        for (int index : selected) subs.push_back(prefix[player].members[index].deep_copy());
        auto cross = train_routing(*run.game, player, std::move(subs), prefix[player], cfg.conflux,
                                   cfg.dqn, derive_seed(stream, {3}));
        cross.routing.provenance = selected;
        Rng rng_route(derive_seed(stream, {4}));
        emit(t, player, "conflux-br",
             head_to_head(*run.game, *cross.routing.as_policy(num_actions), player, opponents,
                          sigma_prev[1 - player], eval_episodes, rng_route));

        const auto distilled =
            distill(*run.game, player, cross.routing, prefix[player], prefix[1 - player],
                    sigma_prev[1 - player], cfg.conflux, cfg.dqn, t, derive_seed(stream, {5}));
        Rng rng_dist(derive_seed(stream, {6}));
        emit(t, player, "distill-br",
             head_to_head(*run.game, *distilled.as_policy(num_actions), player, opponents,
                          sigma_prev[1 - player], eval_episodes, rng_dist));
      }
    }
  }
  std::cout << "head-to-head table written to " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_selftest() {
  const auto results = run_selftest();
  bool all_passed = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << "\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-based equilibrium learning in two-player zero-sum games"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment (resumes from a checkpoint)");
  std::string run_preset, run_config, run_out;
  std::vector<std::string> run_overrides;
  run->add_option("--preset", run_preset, "Named preset (see --list-presets)");
  run->add_option("--config", run_config, "Config file path");
  run->add_option("--out", run_out, "Output directory (default $CPSRO_OUT_DIR/<name>)");
  run->add_option("--override,-O", run_overrides, "key=value config override (repeatable)");
  std::string run_variant, run_seed;
  run->add_option("--variant", run_variant, "psro | psd | conflux");
  run->add_option("--seed", run_seed, "Run seed");
  bool list_presets = false;
  run->add_flag("--list-presets", list_presets, "List preset names and exit");

  auto* eval = app.add_subcommand("eval", "Evaluate a run checkpoint");
  std::string eval_ckpt, eval_mode = "exact";
  int eval_episodes = 0, eval_br_episodes = 0;
  uint64_t eval_seed = 1;
  bool compare_conflux = false;
  eval->add_option("--ckpt", eval_ckpt, "Run directory holding config.cfg and ckpt/")->required();
  eval->add_option("--mode", eval_mode, "exact | approx | h2h")
      ->check(CLI::IsMember({"exact", "approx", "h2h"}));
  eval->add_option("--episodes", eval_episodes, "Episode budget override");
  eval->add_option("--seed", eval_seed, "Evaluation seed");
  eval->add_flag("--compare-conflux", compare_conflux,
                 "In h2h mode, also train and score a standard BR, a conflux BR and its "
                 "distillation per iteration");
  eval->add_option("--br-episodes", eval_br_episodes,
                   "Training budget for --compare-conflux (default: config value)");

  auto* plot = app.add_subcommand("plot", "Render metrics CSVs as an SVG line chart");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg";
  plot->add_option("csv", plot_inputs, "Metrics CSV files")->required();
  plot->add_option("--out", plot_out, "Output SVG path");

  auto* selftest = app.add_subcommand("selftest", "Run the fast invariant suite");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      if (list_presets) {
        for (const auto& name : cpsro::preset_names()) std::cout << name << "\n";
        return kExitOk;
      }
      if (!run_variant.empty()) run_overrides.push_back("variant=" + run_variant);
      if (!run_seed.empty()) run_overrides.push_back("seed=" + run_seed);
      return cmd_run(run_preset, run_config, run_overrides, run_out);
    }
    if (eval->parsed()) {
      const LoadedRun loaded = load_run(eval_ckpt);
      if (eval_mode == "h2h") {
        return cmd_eval_h2h(loaded, eval_ckpt, eval_episodes, eval_seed, compare_conflux,
                            eval_br_episodes);
      }
      return cmd_eval_exploit(loaded, eval_ckpt, eval_mode == "approx", eval_episodes, eval_seed);
    }
    if (plot->parsed()) {
      std::vector<std::filesystem::path> paths(plot_inputs.begin(), plot_inputs.end());
      cpsro::plot_metrics_csvs(paths, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return kExitOk;
    }
    if (selftest->parsed()) return cmd_selftest();
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const cpsro::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const cpsro::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
