#include "cpsro/policy.hpp"

#include "cpsro/error.hpp"
#include "cpsro/games/maze.hpp"

namespace cpsro {

StateSample make_sample(const State& state, int player, int num_actions) {
  StateSample s;
  s.key = state.information_state_key(player);
  s.features = state.encode(player);
  s.legal.assign(num_actions, 0);
  for (Action a : state.legal_actions()) {
    CPSRO_CHECK(a >= 0 && a < num_actions, "make_sample: action outside global space");
    s.legal[a] = 1;
  }
  return s;
}

std::vector<double> uniform_over_legal(std::span<const uint8_t> legal) {
  int num_legal = 0;
  for (uint8_t bit : legal) num_legal += bit ? 1 : 0;
  CPSRO_CHECK(num_legal > 0, "uniform_over_legal: empty mask");
  std::vector<double> p(legal.size(), 0.0);
  for (size_t a = 0; a < legal.size(); ++a) {
    if (legal[a]) p[a] = 1.0 / num_legal;
  }
  return p;
}

std::vector<double> one_hot(Action action, size_t size) {
  std::vector<double> p(size, 0.0);
  p[action] = 1.0;
  return p;
}

Action Policy::act(const StateSample& s, Rng& rng) const {
  const auto dist = deployment_distribution(s);
  return rng.categorical(dist);
}

Action NetPolicy::act(const StateSample& s, Rng&) const {
  return masked_argmax(net_->forward(s.features), s.legal);
}

std::vector<double> NetPolicy::deployment_distribution(const StateSample& s) const {
  return one_hot(masked_argmax(net_->forward(s.features), s.legal), s.legal.size());
}

std::vector<double> NetPolicy::distribution(const StateSample& s, double tau) const {
  return policy_distribution(*net_, s.features, s.legal, tau);
}

Action UniformRandomPolicy::act(const StateSample& s, Rng& rng) const {
  int num_legal = 0;
  for (uint8_t bit : s.legal) num_legal += bit ? 1 : 0;
  CPSRO_CHECK(num_legal > 0, "UniformRandomPolicy: empty mask");
  int pick = rng.uniform_int(num_legal);
  for (size_t a = 0; a < s.legal.size(); ++a) {
    if (s.legal[a] && pick-- == 0) return static_cast<int>(a);
  }
  return 0;  // unreachable
}

std::vector<double> UniformRandomPolicy::deployment_distribution(const StateSample& s) const {
  return uniform_over_legal(s.legal);
}

std::vector<double> UniformRandomPolicy::distribution(const StateSample& s, double) const {
  return uniform_over_legal(s.legal);
}

Action TabularPolicy::act(const StateSample& s, Rng& rng) const {
  return rng.categorical(deployment_distribution(s));
}

std::vector<double> TabularPolicy::deployment_distribution(const StateSample& s) const {
  auto it = table_.find(s.key);
  if (it == table_.end()) return uniform_over_legal(s.legal);
  CPSRO_CHECK(it->second.size() == s.legal.size(), "TabularPolicy: stored size mismatch");
  return it->second;
}

std::vector<double> TabularPolicy::distribution(const StateSample& s, double) const {
  return deployment_distribution(s);
}

Action ScriptedPolicy::act(const StateSample& s, Rng&) const {
  return maze::scripted_action_from_key(script_, s.key);
}

std::vector<double> ScriptedPolicy::deployment_distribution(const StateSample& s) const {
  return one_hot(maze::scripted_action_from_key(script_, s.key), num_actions_);
}

std::vector<double> ScriptedPolicy::distribution(const StateSample& s, double) const {
  return deployment_distribution(s);
}

}  // namespace cpsro
