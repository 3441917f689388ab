#include <cmath>
#include <filesystem>
#include <functional>
#include <set>

#include "cpsro/conflux.hpp"
#include "cpsro/config.hpp"
#include "cpsro/eval.hpp"
#include "cpsro/games/maze.hpp"
#include "doctest.h"

using namespace cpsro;

namespace {

StateSample synthetic_state(const std::string& key, int num_actions) {
  StateSample s;
  s.key = key;
  s.features = {0.0};
  s.legal.assign(num_actions, 1);
  return s;
}

PolicySnapshot tabular_member(std::vector<std::pair<std::string, std::vector<double>>> rows,
                              int index) {
  std::unordered_map<std::string, std::vector<double>> table(rows.begin(), rows.end());
  return PolicySnapshot::tabular(std::move(table), "t" + std::to_string(index), 0);
}

}  // namespace

TEST_CASE("conflux schedule") {
  ConfluxConfig cc;
  cc.start_iteration = 10;
  cc.interval = 2;
  CHECK(conflux_should_run(10, cc));
  CHECK(!conflux_should_run(11, cc));
  CHECK(conflux_should_run(12, cc));
  CHECK(!conflux_should_run(9, cc));
  cc.start_iteration = 20;
  cc.interval = 3;
  CHECK(conflux_should_run(26, cc));
  CHECK(!conflux_should_run(25, cc));
}

TEST_CASE("pairwise kl: identity, hand value, positivity") {
  const auto s0 = synthetic_state("s0", 2);
  const std::vector<StateSample> states = {s0};
  const TabularPolicy p({{"s0", {0.9, 0.1}}});
  const TabularPolicy q({{"s0", {0.1, 0.9}}});
  CHECK(pairwise_kl(p, p, states, 1.0) == 0.0);
  CHECK(pairwise_kl(p, q, states, 1.0) == doctest::Approx(0.8 * std::log(9.0)).epsilon(1e-9));
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(2), b(2);
    a[0] = rng.uniform() * 0.98 + 0.01;
    a[1] = 1.0 - a[0];
    b[0] = rng.uniform() * 0.98 + 0.01;
    b[1] = 1.0 - b[0];
    const TabularPolicy pa({{"s0", a}});
    const TabularPolicy pb({{"s0", b}});
    CHECK(pairwise_kl(pa, pb, states, 1.0) >= -1e-12);
  }
}

TEST_CASE("selection: n=1 returns only the top-sigma policy") {
  Population pop;
  pop.members.push_back(tabular_member({{"s0", {0.5, 0.5}}}, 0));
  pop.members.push_back(tabular_member({{"s0", {0.9, 0.1}}}, 1));
  pop.members.push_back(tabular_member({{"s0", {0.1, 0.9}}}, 2));
  const std::vector<StateSample> states = {synthetic_state("s0", 2)};
  const auto selected = select_sub_policies(pop, {0.2, 0.5, 0.3}, 3, 1, states, 1.0, 2);
  CHECK(selected == std::vector<int>{1});
}

TEST_CASE("selection: zero-diversity candidates fall back to sigma order") {
  Population pop;
  for (int i = 0; i < 4; ++i) pop.members.push_back(tabular_member({{"s0", {0.7, 0.3}}}, i));
  const std::vector<StateSample> states = {synthetic_state("s0", 2)};
  const auto selected = select_sub_policies(pop, {0.1, 0.4, 0.3, 0.2}, 4, 3, states, 1.0, 2);
  // Top is index 1; all diversities are zero, so picks follow sigma order.
  CHECK(selected == std::vector<int>{1, 2, 3});
}

TEST_CASE("selection is deterministic and includes the argmax-sigma index") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int pop_size = 4 + rng.uniform_int(4);
    Population pop;
    std::vector<StateSample> states;
    for (int s = 0; s < 5; ++s) states.push_back(synthetic_state("s" + std::to_string(s), 3));
    for (int k = 0; k < pop_size; ++k) {
      std::vector<std::pair<std::string, std::vector<double>>> rows;
      for (int s = 0; s < 5; ++s) {
        std::vector<double> dist(3);
        double total = 0;
        for (double& v : dist) {
          v = rng.uniform() + 1e-3;
          total += v;
        }
        for (double& v : dist) v /= total;
        rows.emplace_back("s" + std::to_string(s), dist);
      }
      pop.members.push_back(tabular_member(rows, k));
    }
    MetaStrategy sigma(pop_size);
    double total = 0;
    for (double& v : sigma) {
      v = rng.uniform();
      total += v;
    }
    for (double& v : sigma) v /= total;
    int argmax = 0;
    for (int i = 1; i < pop_size; ++i)
      if (sigma[i] > sigma[argmax]) argmax = i;
    const int m = 3 + rng.uniform_int(pop_size - 2);
    const int n = 1 + rng.uniform_int(m);
    const auto a = select_sub_policies(pop, sigma, m, n, states, 1.0, 3);
    const auto b = select_sub_policies(pop, sigma, m, n, states, 1.0, 3);
    CHECK(a == b);
    CHECK(a.front() == argmax);
    std::set<int> unique(a.begin(), a.end());
    CHECK(unique.size() == a.size());
  }
}

TEST_CASE("selection pool larger than the population is a config error") {
  Population pop;
  pop.members.push_back(tabular_member({{"s0", {1.0, 0.0}}}, 0));
  const std::vector<StateSample> states = {synthetic_state("s0", 2)};
  CHECK_THROWS_AS(select_sub_policies(pop, {1.0}, 2, 1, states, 1.0, 2), ConfigError);
}

TEST_CASE("single-sub routing deploys exactly its sub-policy") {
  auto game = make_game("kuhn");
  RunConfig cfg = preset_config("kuhn-accept");
  ConfluxConfig cc = cfg.conflux;
  cc.routing_episodes = 300;
  Rng rng(3);
  // A trained-ish net as the single sub.
  QNetwork net = make_network({game->feature_size(), 16, game->num_actions()}, rng);
  std::vector<PolicySnapshot> subs;
  subs.push_back(PolicySnapshot::from_net(net, "sub", 0, {}));
  Population own;
  own.members.push_back(PolicySnapshot::uniform_random(0));
  cc.train_subs = false;  // keep the sub frozen so it stays comparable
  auto cross = train_routing(*game, 0, std::move(subs), own, cc, cfg.dqn, 17);
  const auto routed = cross.routing.as_policy(game->num_actions());
  const NetPolicy direct(std::make_shared<QNetwork>(net));
  // Action-for-action agreement on every player-0 infoset.
  std::function<void(const State&)> walk = [&](const State& state) {
    if (state.is_terminal()) return;
    if (state.is_chance()) {
      for (const auto& outcome : state.chance_outcomes()) walk(*state.child(outcome.action));
      return;
    }
    if (state.current_player() == 0) {
      const auto sample = make_sample(state, 0, game->num_actions());
      Rng tie(1);
      CHECK(routed->act(sample, tie) == direct.act(sample, tie));
    }
    for (Action a : state.legal_actions()) walk(*state.child(a));
  };
  walk(*game->new_initial_state());
}

TEST_CASE("routing never mutates the stored population snapshots") {
  auto game = make_game("kuhn");
  RunConfig cfg = preset_config("kuhn-accept");
  ConfluxConfig cc = cfg.conflux;
  cc.routing_episodes = 500;
  Rng rng(7);
  Population own;
  own.members.push_back(PolicySnapshot::uniform_random(0));
  own.members.push_back(PolicySnapshot::from_net(
      make_network({game->feature_size(), 16, game->num_actions()}, rng), "oracle", 1, {}));
  const QNetwork before = *own.members[1].net;
  std::vector<PolicySnapshot> subs = {own.members[1].deep_copy()};
  auto cross = train_routing(*game, 0, std::move(subs), own, cc, cfg.dqn, 23);
  CHECK(own.members[1].net->weights == before.weights);
  CHECK(own.members[1].net->biases == before.biases);
  // The routing policy's own sub did train away from the copy.
  CHECK(cross.routing.subs[0].net->weights != before.weights);
}

TEST_CASE("router over the frozen maze scripts beats the monster") {
  auto game = make_game("maze");
  const RunConfig cfg = preset_config("maze-fixture");
  std::vector<PolicySnapshot> subs;
  subs.push_back(PolicySnapshot::scripted("pi1", 0));
  subs.push_back(PolicySnapshot::scripted("pi2", 0));
  const ScriptedPolicy monster("monster", game->num_actions());
  const EarlyStop stop{1.0, 250, 4};
  const auto routing = train_router_vs_fixed(*game, 0, std::move(subs), monster, cfg.conflux,
                                             cfg.dqn, 20000, 1, stop);
  Rng rng(99);
  const auto policy = routing.as_policy(game->num_actions());
  // Deterministic matchup: a single greedy episode decides it.
  CHECK(play_episode(*game, *policy, monster, rng) == 1.0);
}

TEST_CASE("distillation with zero weights reduces to the plain oracle") {
  auto game = make_game("kuhn");
  RunConfig cfg = preset_config("kuhn-accept");
  ConfluxConfig cc = cfg.conflux;
  cc.lambda1 = 0.0;
  cc.lambda2 = 0.0;
  cc.distill_episodes = 400;
  Rng rng(5);
  Population own, opp;
  own.members.push_back(PolicySnapshot::uniform_random(0));
  opp.members.push_back(PolicySnapshot::uniform_random(0));
  RoutingPolicy routing;
  routing.router = make_network({game->feature_size(), 8, 1}, rng);
  routing.subs.push_back(own.members[0].deep_copy());
  const auto distilled =
      distill(*game, 0, routing, own, opp, {1.0}, cc, cfg.dqn, 1, /*seed=*/71);

  OpponentMixture opponents{opp.policies(game->num_actions()), {1.0}};
  const auto oracle = train_oracle(*game, 0, opponents, cfg.dqn, 400, /*seed=*/71);
  CHECK(distilled.net->weights == oracle.net.weights);
  CHECK(distilled.net->biases == oracle.net.biases);
  CHECK(distilled.tag == "conflux-distill");
}

TEST_CASE("routing checkpoint round-trips") {
  auto game = make_game("maze");
  Rng rng(13);
  RoutingPolicy routing;
  routing.router = make_network({game->feature_size(), 8, 2}, rng);
  routing.provenance = {4, 7};
  routing.subs.push_back(PolicySnapshot::scripted("pi1", 3));
  routing.subs.push_back(PolicySnapshot::from_net(
      make_network({game->feature_size(), 8, game->num_actions()}, rng), "oracle", 5, {}));
  const auto dir = std::filesystem::temp_directory_path() / "cpsro_routing_rt";
  std::filesystem::remove_all(dir);
  save_routing(dir, routing);
  const auto loaded = load_routing(dir);
  CHECK(loaded.router.weights == routing.router.weights);
  CHECK(loaded.provenance == routing.provenance);
  REQUIRE(loaded.subs.size() == 2);
  CHECK(loaded.subs[0].script == "pi1");
  CHECK(loaded.subs[1].net->weights == routing.subs[1].net->weights);
  std::filesystem::remove_all(dir);
}
