#include "cpsro/conflux.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "cpsro/error.hpp"
#include "json.hpp"

namespace cpsro {

void ConfluxConfig::validate(int population_size_at_start) const {
  if (start_iteration < 0) throw ConfigError("conflux: start iteration must be >= 0");
  if (interval <= 0) throw ConfigError("conflux: interval must be positive");
  if (num_subs < 1) throw ConfigError("conflux: need at least one sub-policy");
  if (pool_size < num_subs) throw ConfigError("conflux: pool smaller than sub-policy count");
  if (population_size_at_start >= 0 && pool_size > population_size_at_start) {
    throw ConfigError("conflux: selected pool exceeds the population size at the start iteration");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("conflux: weights must be >= 0");
  if (routing_episodes <= 0 || distill_episodes <= 0) {
    throw ConfigError("conflux: episode budgets must be positive");
  }
  if (kl_temperature <= 0.0) throw ConfigError("conflux: KL temperature must be positive");
  if (selection_states <= 0) throw ConfigError("conflux: selection state sample must be positive");
  if (cross_play_blocks <= 0) throw ConfigError("conflux: need at least one cross-play block");
  if (sub_lr <= 0.0) throw ConfigError("conflux: sub-policy learning rate must be positive");
}

bool conflux_should_run(int iteration, const ConfluxConfig& config) {
  CPSRO_CHECK(iteration >= 0, "conflux_should_run: negative iteration");
  return iteration >= config.start_iteration &&
         (iteration - config.start_iteration) % config.interval == 0;
}

double pairwise_kl(const Policy& a, const Policy& b, std::span<const StateSample> states,
                   double tau) {
  CPSRO_CHECK(!states.empty(), "pairwise_kl: empty state sample");
  double total = 0.0;
  for (const auto& state : states) {
    total += kl_divergence(a.distribution(state, tau), b.distribution(state, tau));
  }
  return total / static_cast<double>(states.size());
}

std::vector<int> select_sub_policies(const Population& pop, const MetaStrategy& sigma, int m,
                                     int n, std::span<const StateSample> states, double tau,
                                     int num_actions) {
  CPSRO_CHECK(static_cast<int>(sigma.size()) == pop.size(),
              "select_sub_policies: sigma does not match population");
  CPSRO_CHECK(n >= 1 && n <= m, "select_sub_policies: need 1 <= n <= m");
  if (m > pop.size()) throw ConfigError("select_sub_policies: pool exceeds population size");
  CPSRO_CHECK(!states.empty(), "select_sub_policies: empty state sample");

  // Sort by sigma descending, ties to the lower index.
  std::vector<int> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int lhs, int rhs) { return sigma[lhs] > sigma[rhs]; });

  std::vector<int> selected = {order[0]};
  std::vector<int> candidates(order.begin() + 1, order.begin() + m);

  std::map<int, PolicyRef> realized;
  auto policy_of = [&](int index) -> const Policy& {
    auto it = realized.find(index);
    if (it == realized.end()) {
      it = realized.emplace(index, pop.members[index].as_policy(num_actions)).first;
    }
    return *it->second;
  };
  std::map<std::pair<int, int>, double> kl_cache;
  auto kl_of = [&](int from, int to) {
    const auto key = std::make_pair(from, to);
    auto it = kl_cache.find(key);
    if (it == kl_cache.end()) {
      it = kl_cache.emplace(key, pairwise_kl(policy_of(from), policy_of(to), states, tau)).first;
    }
    return it->second;
  };

  while (static_cast<int>(selected.size()) < n) {
    int best_pos = 0;
    double best_diversity = -1.0;
    for (size_t pos = 0; pos < candidates.size(); ++pos) {
      double diversity = std::numeric_limits<double>::infinity();
      for (int chosen : selected) {
        diversity = std::min(diversity, kl_of(candidates[pos], chosen));
      }
      // Strict > keeps the earlier (higher-sigma) candidate on ties.
      if (diversity > best_diversity) {
        best_diversity = diversity;
        best_pos = static_cast<int>(pos);
      }
    }
    selected.push_back(candidates[best_pos]);
    candidates.erase(candidates.begin() + best_pos);
  }
  return selected;
}

std::vector<StateSample> gather_selection_states(const Game& game, const Population& own_pop,
                                                 const MetaStrategy& own_sigma,
                                                 const Population& opp_pop,
                                                 const MetaStrategy& opp_sigma, int player,
                                                 int target_states, Rng& rng) {
  int top = 0;
  for (int i = 1; i < own_pop.size(); ++i) {
    if (own_sigma[i] > own_sigma[top]) top = i;
  }
  std::vector<StateSample> states = own_pop.members[top].state_buffer;

  if (static_cast<int>(states.size()) < target_states) {
    // Refresh by greedy rollouts of the top policy against the opponent
    // meta-NE mixture.
    const auto top_policy = own_pop.members[top].as_policy(game.num_actions());
    const auto opponents = opp_pop.policies(game.num_actions());
    int guard = 64 * std::max(target_states, 64);
    while (static_cast<int>(states.size()) < target_states && guard-- > 0) {
      const Policy& opponent = *opponents[rng.categorical(opp_sigma)];
      auto state = game.new_initial_state();
      while (!state->is_terminal()) {
        if (state->is_chance()) {
          const auto outcomes = state->chance_outcomes();
          std::vector<double> probs(outcomes.size());
          for (size_t i = 0; i < outcomes.size(); ++i) probs[i] = outcomes[i].probability;
          state->apply_action(outcomes[rng.categorical(probs)].action);
          continue;
        }
        const int actor = state->current_player();
        const auto sample = make_sample(*state, actor, game.num_actions());
        if (actor == player) states.push_back(sample);
        state->apply_action((actor == player ? *top_policy : opponent).act(sample, rng));
      }
    }
  }
  if (static_cast<int>(states.size()) > target_states) {
    // Uniform subsample without replacement (partial Fisher-Yates).
    for (int i = 0; i < target_states; ++i) {
      const int j = i + rng.uniform_int(static_cast<int>(states.size()) - i);
      std::swap(states[i], states[j]);
    }
    states.resize(target_states);
  }
  return states;
}

namespace {

// Deployment of a routing policy: argmax router Q picks the sub, the sub
// supplies the action (or, for KL targets, its distribution).
class RoutingDeployPolicy final : public Policy {
 public:
  RoutingDeployPolicy(QNetwork router, std::vector<PolicyRef> subs)
      : router_(std::move(router)), subs_(std::move(subs)) {}

  Action act(const StateSample& s, Rng& rng) const override { return subs_[route(s)]->act(s, rng); }
  std::vector<double> deployment_distribution(const StateSample& s) const override {
    return subs_[route(s)]->deployment_distribution(s);
  }
  std::vector<double> distribution(const StateSample& s, double tau) const override {
    return subs_[route(s)]->distribution(s, tau);
  }

 private:
  int route(const StateSample& s) const {
    const std::vector<uint8_t> all(subs_.size(), 1);
    return masked_argmax(router_.forward(s.features), all);
  }

  QNetwork router_;
  std::vector<PolicyRef> subs_;
};

struct SubLearner {
  std::optional<DqnLearner> learner;  // trainable net subs
  PolicyRef fixed;                    // frozen subs (scripted or uniform)
};

std::vector<SubLearner> make_sub_learners(const Game& game, const std::vector<PolicySnapshot>& subs,
                                          const ConfluxConfig& config, const DqnHyper& hyper,
                                          Rng& rng) {
  std::vector<SubLearner> learners;
  for (const auto& snapshot : subs) {
    SubLearner sub;
    if (snapshot.kind == PolicySnapshot::Kind::kNet && config.train_subs) {
      DqnHyper sub_hyper = hyper;
      sub_hyper.lr = config.sub_lr;
      sub_hyper.hidden.assign(snapshot.net->widths.begin() + 1, snapshot.net->widths.end() - 1);
      sub.learner.emplace(game.feature_size(), game.num_actions(), sub_hyper, rng);
      sub.learner->mutable_net() = *snapshot.net;  // warm start from the copy
    } else {
      sub.fixed = snapshot.as_policy(game.num_actions());
    }
    learners.push_back(std::move(sub));
  }
  return learners;
}

// Current deployment view of the in-training routing policy.
PolicyRef frozen_routing_view(const Game& game, const DqnLearner& router,
                              const std::vector<PolicySnapshot>& subs,
                              const std::vector<SubLearner>& learners) {
  std::vector<PolicyRef> views;
  for (size_t i = 0; i < learners.size(); ++i) {
    if (learners[i].learner) {
      views.push_back(
          std::make_shared<NetPolicy>(std::make_shared<QNetwork>(learners[i].learner->net())));
    } else {
      views.push_back(subs[i].as_policy(game.num_actions()));
    }
  }
  return std::make_shared<RoutingDeployPolicy>(router.net(), std::move(views));
}

// Routing episode: the router epsilon-greedily picks a sub index, the chosen
// sub acts greedily, the router's TD update sees (s, i, r, s') over sub
// indices, and the chosen sub (when trainable) takes the environment
// transition (s, a, r, s').
double run_routing_episode(const Game& game, DqnLearner& router, std::vector<SubLearner>& subs,
                           int player, const Policy& opponent, Rng& rng) {
  auto state = game.new_initial_state();
  const int n = static_cast<int>(subs.size());
  const std::vector<uint8_t> sub_mask(n, 1);

  struct PendingRouter {
    std::vector<double> features;
    int sub_index;
  };
  struct PendingEnv {
    std::vector<double> features;
    Action action;
    int sub_index;
  };
  std::optional<PendingRouter> pending_router;
  std::optional<PendingEnv> pending_env;

  while (!state->is_terminal()) {
    if (state->is_chance()) {
      const auto outcomes = state->chance_outcomes();
      std::vector<double> probs(outcomes.size());
      for (size_t i = 0; i < outcomes.size(); ++i) probs[i] = outcomes[i].probability;
      state->apply_action(outcomes[rng.categorical(probs)].action);
      continue;
    }
    const int actor = state->current_player();
    if (actor != player) {
      const auto sample = make_sample(*state, actor, game.num_actions());
      state->apply_action(opponent.act(sample, rng));
      continue;
    }
    const auto sample = make_sample(*state, player, game.num_actions());
    if (pending_router) {
      router.observe({std::move(pending_router->features), pending_router->sub_index, 0.0,
                      sample.features, sub_mask, false},
                     rng);
    }
    if (pending_env) {
      auto& owner = subs[pending_env->sub_index];
      if (owner.learner) {
        owner.learner->observe({std::move(pending_env->features), pending_env->action, 0.0,
                                sample.features, sample.legal, false},
                               rng);
      }
    }
    const int sub_index = router.act(sample.features, sub_mask, rng);
    auto& chosen = subs[sub_index];
    const Action action =
        chosen.learner ? masked_argmax(chosen.learner->net().forward(sample.features), sample.legal)
                       : chosen.fixed->act(sample, rng);
    pending_router = PendingRouter{sample.features, sub_index};
    pending_env = PendingEnv{sample.features, action, sub_index};
    state->apply_action(action);
  }

  const double utility = state->returns()[player];
  if (pending_router) {
    router.observe(
        {std::move(pending_router->features), pending_router->sub_index, utility, {}, {}, true},
        rng);
  }
  if (pending_env) {
    auto& owner = subs[pending_env->sub_index];
    if (owner.learner) {
      owner.learner->observe(
          {std::move(pending_env->features), pending_env->action, utility, {}, {}, true}, rng);
    }
  }
  return utility;
}

RoutingPolicy assemble_routing(const DqnLearner& router, std::vector<PolicySnapshot> subs,
                               const std::vector<SubLearner>& learners,
                               std::vector<int> provenance) {
  RoutingPolicy routing;
  routing.router = router.net();
  for (size_t i = 0; i < subs.size(); ++i) {
    if (learners[i].learner) {
      subs[i].net = std::make_shared<QNetwork>(learners[i].learner->net());
    }
  }
  routing.subs = std::move(subs);
  routing.provenance = std::move(provenance);
  return routing;
}

}  // namespace

PolicyRef RoutingPolicy::as_policy(int num_actions) const {
  std::vector<PolicyRef> sub_policies;
  for (const auto& sub : subs) sub_policies.push_back(sub.as_policy(num_actions));
  return std::make_shared<RoutingDeployPolicy>(router, std::move(sub_policies));
}

CrossPlayResult train_routing(const Game& game, int player, std::vector<PolicySnapshot> subs,
                              const Population& own_pop, const ConfluxConfig& config,
                              const DqnHyper& hyper, uint64_t seed) {
  CPSRO_CHECK(!subs.empty(), "train_routing: need at least one sub-policy");
  // Callers that selected from a population overwrite provenance with the
  // selected indices afterwards.
  std::vector<int> provenance(subs.size(), -1);

  Rng rng(seed);
  DqnLearner router(game.feature_size(), static_cast<int>(subs.size()), hyper, rng);
  auto sub_learners = make_sub_learners(game, subs, config, hyper, rng);
  DqnLearner exploiter(game.feature_size(), game.num_actions(), hyper, rng);

  // Literal outer-loop pairing: the exploiter trains against the newest
  // population member instead of the routing policy.
  PolicyRef latest_own;
  if (config.exploiter_vs_latest) {
    CPSRO_CHECK(own_pop.size() > 0, "train_routing: empty own population");
    latest_own = own_pop.members.back().as_policy(game.num_actions());
  }

  const int block = std::max(1, config.routing_episodes / config.cross_play_blocks);
  int exploiter_left = config.routing_episodes;
  int router_left = config.routing_episodes;
  while (exploiter_left > 0 || router_left > 0) {
    if (exploiter_left > 0) {
      const PolicyRef target = config.exploiter_vs_latest
                                   ? latest_own
                                   : frozen_routing_view(game, router, subs, sub_learners);
      const int episodes = std::min(block, exploiter_left);
      for (int e = 0; e < episodes; ++e) {
        run_learning_episode(game, exploiter, 1 - player, *target, rng);
      }
      exploiter_left -= episodes;
    }
    if (router_left > 0) {
      const NetPolicy frozen_exploiter(std::make_shared<QNetwork>(exploiter.net()));
      const int episodes = std::min(block, router_left);
      for (int e = 0; e < episodes; ++e) {
        run_routing_episode(game, router, sub_learners, player, frozen_exploiter, rng);
      }
      router_left -= episodes;
    }
  }

  CrossPlayResult result;
  result.routing = assemble_routing(router, std::move(subs), sub_learners, std::move(provenance));
  result.exploiter = exploiter.net();
  return result;
}

RoutingPolicy train_router_vs_fixed(const Game& game, int player, std::vector<PolicySnapshot> subs,
                                    const Policy& opponent, const ConfluxConfig& config,
                                    const DqnHyper& hyper, int episodes, uint64_t seed,
                                    const std::optional<EarlyStop>& early_stop) {
  CPSRO_CHECK(!subs.empty(), "train_router_vs_fixed: need at least one sub-policy");
  std::vector<int> provenance(subs.size(), -1);
  Rng rng(seed);
  Rng eval_rng(derive_seed(seed, {0xeba1ULL}));
  DqnLearner router(game.feature_size(), static_cast<int>(subs.size()), hyper, rng);
  auto sub_learners = make_sub_learners(game, subs, config, hyper, rng);

  for (int episode = 0; episode < episodes; ++episode) {
    run_routing_episode(game, router, sub_learners, player, opponent, rng);
    if (early_stop && (episode + 1) % early_stop->eval_every == 0) {
      const PolicyRef view = frozen_routing_view(game, router, subs, sub_learners);
      double total = 0.0;
      for (int e = 0; e < early_stop->eval_episodes; ++e) {
        const double u0 = player == 0 ? play_episode(game, *view, opponent, eval_rng)
                                      : play_episode(game, opponent, *view, eval_rng);
        total += player == 0 ? u0 : -u0;
      }
      if (total / early_stop->eval_episodes >= early_stop->target) break;
    }
  }
  return assemble_routing(router, std::move(subs), sub_learners, std::move(provenance));
}

PolicySnapshot distill(const Game& game, int player, const RoutingPolicy& routing,
                       const Population& own_pop, const Population& opp_pop,
                       const MetaStrategy& opp_sigma, const ConfluxConfig& config,
                       const DqnHyper& hyper, int iteration, uint64_t seed,
                       int reservoir_capacity) {
  const auto routing_deploy = routing.as_policy(game.num_actions());
  const auto own_policies = own_pop.policies(game.num_actions());
  const double tau = config.kl_temperature;

  // Diversity bonus away from the population, per step.
  StepShaper shaper = [&](const QNetwork& net, const StateSample& s) {
    const auto dist = policy_distribution(net, s.features, s.legal, tau);
    double min_kl = std::numeric_limits<double>::infinity();
    for (const auto& member : own_policies) {
      min_kl = std::min(min_kl, kl_divergence(dist, member->distribution(s, tau)));
    }
    return config.lambda2 * min_kl;
  };

  // Imitation of the routing deployment, as a direct KL gradient on the
  // distilled network's Boltzmann distribution: a pure-reward rendering of
  // this term carries no action preference at the state where it is paid,
  // so it cannot steer the argmax.
  const AuxTargetFn aux_target = [&](const StateSample& s) {
    return routing_deploy->distribution(s, tau);
  };
  const AuxGradient aux_gradient = [lambda1 = config.lambda1, tau](
                                       const QNetwork& net,
                                       std::span<const Transition* const> batch, Gradients& out) {
    std::vector<std::vector<double>> deltas;
    std::vector<DeltaSample> samples;
    for (const Transition* t : batch) {
      if (t->aux_target.empty()) continue;
      deltas.push_back(
          softmax_kl_output_delta(net.forward(t->features), t->legal, t->aux_target, tau));
      samples.push_back({t->features, deltas.back()});
    }
    if (samples.empty()) return;
    add_scaled(out, gradient_from_output_deltas(net, samples),
               lambda1 / static_cast<double>(batch.size()));
  };

  OpponentMixture opponents{opp_pop.policies(game.num_actions()),
                            {opp_sigma.begin(), opp_sigma.end()}};
  auto oracle = train_oracle(game, player, opponents, hyper, config.distill_episodes, seed,
                             config.lambda2 > 0.0 ? &shaper : nullptr, reservoir_capacity,
                             config.lambda1 > 0.0 ? &aux_target : nullptr,
                             config.lambda1 > 0.0 ? &aux_gradient : nullptr);
  return PolicySnapshot::from_net(std::move(oracle.net), "conflux-distill", iteration,
                                  std::move(oracle.visited));
}

namespace {
using nlohmann::json;
}

void save_routing(const std::filesystem::path& dir, const RoutingPolicy& routing) {
  std::filesystem::create_directories(dir);
  save_network(routing.router, dir / "router.qnet");
  json manifest;
  manifest["provenance"] = routing.provenance;
  json subs = json::array();
  for (size_t i = 0; i < routing.subs.size(); ++i) {
    const auto& sub = routing.subs[i];
    json entry = {{"tag", sub.tag}, {"created_iteration", sub.created_iteration}};
    if (sub.kind == PolicySnapshot::Kind::kNet) {
      entry["kind"] = "net";
      const std::string name = "sub_" + std::to_string(i) + ".qnet";
      entry["blob"] = name;
      save_network(*sub.net, dir / name);
    } else if (sub.kind == PolicySnapshot::Kind::kScripted) {
      entry["kind"] = "scripted";
      entry["script"] = sub.script;
    } else {
      entry["kind"] = "uniform";
    }
    subs.push_back(std::move(entry));
  }
  manifest["subs"] = std::move(subs);
  std::ofstream out(dir / "routing.json");
  if (!out) throw ConfigError("save_routing: cannot write manifest");
  out << manifest.dump(1);
}

RoutingPolicy load_routing(const std::filesystem::path& dir) {
  std::ifstream in(dir / "routing.json");
  if (!in) throw ConfigError("load_routing: missing manifest in " + dir.string());
  const json manifest = json::parse(in);
  RoutingPolicy routing;
  routing.router = load_network(dir / "router.qnet");
  routing.provenance = manifest.at("provenance").get<std::vector<int>>();
  for (const auto& entry : manifest.at("subs")) {
    const std::string kind = entry.at("kind").get<std::string>();
    PolicySnapshot sub;
    if (kind == "net") {
      sub.kind = PolicySnapshot::Kind::kNet;
      sub.net = std::make_shared<QNetwork>(load_network(dir / entry.at("blob").get<std::string>()));
    } else if (kind == "scripted") {
      sub = PolicySnapshot::scripted(entry.at("script").get<std::string>(), 0);
    }
    sub.tag = entry.at("tag").get<std::string>();
    sub.created_iteration = entry.at("created_iteration").get<int>();
    routing.subs.push_back(std::move(sub));
  }
  return routing;
}

}  // namespace cpsro
