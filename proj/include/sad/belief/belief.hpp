#pragma once

#include <functional>
#include <vector>

namespace sad::belief {

// Histories are identified by integer ids supplied by the caller.
using History = int;

struct BeliefDistribution {
  std::vector<History> support;
  std::vector<double> probs;

  static BeliefDistribution uniform(std::vector<History> support);

  double prob(History h) const;
  // Throws InvariantViolation on negative mass, bad normalization or
  // duplicate support entries.
  void validate(double tolerance = 1e-12) const;
};

// Maps the true history to what the acting agent conditions on.
using ObserverView = std::function<int(History)>;

inline int identity_view(History h) { return h; }

// pi(u | view) = (1 - eps) * [u == greedy(view)] + eps / |U|
struct EpsGreedyPolicy {
  std::function<int(int view)> greedy_action;
  double epsilon = 0.0;
  int action_count = 1;

  double prob(int action, int view) const;
};

// Posterior over histories after observing the acting agent's executed action.
BeliefDistribution bayes_update(const BeliefDistribution& prior, const EpsGreedyPolicy& policy,
                                int observed_action,
                                const ObserverView& observer_view = identity_view);

// Posterior after observing the greedy action directly: the exploration term
// drops out and the update is a pure filter.
BeliefDistribution sad_update(const BeliefDistribution& prior,
                              const std::function<int(History)>& greedy_map, int observed_greedy);

struct BlurReport {
  BeliefDistribution posterior;
  // Per-history share carried over unfiltered from the prior.
  std::vector<double> leak;
  // Per-history share that passed the greedy-consistency filter.
  std::vector<double> filtered;
  double unfiltered_mass = 0.0;
};

// Splits the epsilon-greedy posterior into its prior-proportional leak and
// its filtered part. leak + filtered == bayes_update posterior.
BlurReport blur_report(const BeliefDistribution& prior, const EpsGreedyPolicy& policy,
                       int observed_action, const ObserverView& observer_view = identity_view);

double total_variation(const BeliefDistribution& p, const BeliefDistribution& q);

struct BlurSweepRow {
  double epsilon;
  double unfiltered_mass;
  double tv_from_greedy;  // total variation to the epsilon = 0 posterior
};

// Matrix-game demonstration: P2 watches P1, who holds card 0 or 1 uniformly
// and greedily signals card 0 with action 0 and card 1 with action 2.
// Evaluates the posterior after P1's action 0 on an epsilon grid.
std::vector<BlurSweepRow> matrix_game_blur_sweep(int steps = 10);

}  // namespace sad::belief
