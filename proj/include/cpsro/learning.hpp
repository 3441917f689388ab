#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cpsro/dqn.hpp"
#include "cpsro/game.hpp"
#include "cpsro/policy.hpp"

namespace cpsro {

// Uniform reservoir sample of decision points seen during training.
class SampleReservoir {
 public:
  explicit SampleReservoir(int capacity) : capacity_(capacity) {}
  void add(StateSample sample, Rng& rng);
  const std::vector<StateSample>& samples() const { return samples_; }
  std::vector<StateSample> take() { return std::move(samples_); }

 private:
  int capacity_;
  int64_t seen_ = 0;
  std::vector<StateSample> samples_;
};

// Per-episode opponent: one policy drawn from sigma.
struct OpponentMixture {
  std::vector<PolicyRef> policies;
  std::vector<double> sigma;
  const Policy& sample(Rng& rng) const;
};

// Extra per-step reward evaluated at each learner decision point; receives
// the learner's current network so KL-style terms can use its live
// distribution.
using StepShaper = std::function<double(const QNetwork&, const StateSample&)>;

// Optional per-state distribution target stored on each transition (consumed
// by an AuxGradient, e.g. distillation toward a routing policy).
using AuxTargetFn = std::function<std::vector<double>(const StateSample&)>;

// One episode with the learner controlling `player` (epsilon-greedy) and the
// opponent playing its deployment action. Terminal utility lands on the
// learner's last transition; shaping rewards land per step.
double run_learning_episode(const Game& game, DqnLearner& learner, int player,
                            const Policy& opponent, Rng& rng,
                            const StepShaper* shaper = nullptr,
                            SampleReservoir* reservoir = nullptr,
                            const AuxTargetFn* aux_target = nullptr);

// One evaluation episode between two deployed policies; returns player-0
// utility.
double play_episode(const Game& game, const Policy& p0, const Policy& p1, Rng& rng);

struct OracleResult {
  QNetwork net;
  std::vector<StateSample> visited;  // reservoir of decision points
  double mean_training_utility = 0.0;
};

// Trains a fresh best-response learner for `episodes` episodes against the
// opponent mixture (one draw per episode).
OracleResult train_oracle(const Game& game, int player, const OpponentMixture& opponents,
                          const DqnHyper& hyper, int episodes, uint64_t seed,
                          const StepShaper* shaper = nullptr, int reservoir_capacity = 10000,
                          const AuxTargetFn* aux_target = nullptr,
                          const AuxGradient* aux_gradient = nullptr);

}  // namespace cpsro
