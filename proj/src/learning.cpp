#include "cpsro/learning.hpp"

#include <optional>

#include "cpsro/error.hpp"

namespace cpsro {

void SampleReservoir::add(StateSample sample, Rng& rng) {
  seen_++;
  if (static_cast<int>(samples_.size()) < capacity_) {
    samples_.push_back(std::move(sample));
    return;
  }
  const int64_t slot = static_cast<int64_t>(rng.next() % static_cast<uint64_t>(seen_));
  if (slot < capacity_) samples_[slot] = std::move(sample);
}

const Policy& OpponentMixture::sample(Rng& rng) const {
  CPSRO_CHECK(!policies.empty(), "OpponentMixture: empty mixture");
  if (policies.size() == 1) return *policies[0];
  return *policies[rng.categorical(sigma)];
}

namespace {

Action sample_chance(const State& state, Rng& rng) {
  const auto outcomes = state.chance_outcomes();
  std::vector<double> probs(outcomes.size());
  for (size_t i = 0; i < outcomes.size(); ++i) probs[i] = outcomes[i].probability;
  return outcomes[rng.categorical(probs)].action;
}

}  // namespace

double run_learning_episode(const Game& game, DqnLearner& learner, int player,
                            const Policy& opponent, Rng& rng, const StepShaper* shaper,
                            SampleReservoir* reservoir, const AuxTargetFn* aux_target) {
  auto state = game.new_initial_state();
  struct Pending {
    StateSample sample;
    Action action;
    double reward;
    std::vector<double> aux;
  };
  std::optional<Pending> pending;

  auto flush = [&](const StateSample* next) {
    if (!pending) return;
    Transition t;
    t.features = std::move(pending->sample.features);
    t.action = pending->action;
    t.reward = pending->reward;
    t.legal = std::move(pending->sample.legal);
    t.aux_target = std::move(pending->aux);
    if (next) {
      t.next_features = next->features;
      t.next_legal = next->legal;
    } else {
      t.reward += state->returns()[player];
      t.terminal = true;
    }
    learner.observe(std::move(t), rng);
  };

  while (!state->is_terminal()) {
    if (state->is_chance()) {
      state->apply_action(sample_chance(*state, rng));
      continue;
    }
    const int actor = state->current_player();
    if (actor != player) {
      const auto sample = make_sample(*state, actor, game.num_actions());
      state->apply_action(opponent.act(sample, rng));
      continue;
    }
    auto sample = make_sample(*state, player, game.num_actions());
    flush(&sample);
    const double shaped = shaper ? (*shaper)(learner.net(), sample) : 0.0;
    std::vector<double> aux = aux_target ? (*aux_target)(sample) : std::vector<double>{};
    const Action action = learner.act(sample.features, sample.legal, rng);
    if (reservoir) reservoir->add(sample, rng);
    pending = Pending{std::move(sample), action, shaped, std::move(aux)};
    state->apply_action(action);
  }

  flush(nullptr);
  return state->returns()[player];
}

double play_episode(const Game& game, const Policy& p0, const Policy& p1, Rng& rng) {
  auto state = game.new_initial_state();
  while (!state->is_terminal()) {
    if (state->is_chance()) {
      state->apply_action(sample_chance(*state, rng));
      continue;
    }
    const int actor = state->current_player();
    const auto sample = make_sample(*state, actor, game.num_actions());
    state->apply_action((actor == 0 ? p0 : p1).act(sample, rng));
  }
  return state->returns()[0];
}

OracleResult train_oracle(const Game& game, int player, const OpponentMixture& opponents,
                          const DqnHyper& hyper, int episodes, uint64_t seed,
                          const StepShaper* shaper, int reservoir_capacity,
                          const AuxTargetFn* aux_target, const AuxGradient* aux_gradient) {
  Rng rng(seed);
  DqnLearner learner(game.feature_size(), game.num_actions(), hyper, rng);
  if (aux_gradient) learner.set_aux_gradient(*aux_gradient);
  SampleReservoir reservoir(reservoir_capacity);
  double total_utility = 0.0;
  for (int episode = 0; episode < episodes; ++episode) {
    const Policy& opponent = opponents.sample(rng);
    total_utility += run_learning_episode(game, learner, player, opponent, rng, shaper, &reservoir,
                                          aux_target);
  }
  OracleResult result;
  result.net = learner.net();
  result.visited = reservoir.take();
  result.mean_training_utility = episodes > 0 ? total_utility / episodes : 0.0;
  return result;
}

}  // namespace cpsro
