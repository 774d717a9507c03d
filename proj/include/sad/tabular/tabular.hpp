#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sad/core/rng.hpp"
#include "sad/matrix_game/payoff.hpp"

namespace sad::tabular {

using matrix_game::kNumActions;
using matrix_game::kNumCards;
using QRow = std::array<double, kNumActions>;

// argmax with ties broken towards the lowest action id.
int greedy_action(const QRow& row);

// P2's information state. `greedy` is the P1 greedy action seen through the
// SAD channel; it is absent when the channel is disabled.
struct P2Key {
  int card = 0;
  int env_action = 0;
  std::optional<int> greedy;

  int arity() const { return greedy ? 3 : 2; }
};

class QTable {
 public:
  explicit QTable(int rows = 0) : rows_(rows, QRow{0.0, 0.0, 0.0}) {}

  QRow& row(int key) { return rows_.at(key); }
  const QRow& row(int key) const { return rows_.at(key); }
  int size() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<QRow> rows_;
};

// One Q-table per player. P1 is keyed on its card; P2 on P2Key.
struct TabularAgents {
  explicit TabularAgents(bool sad);

  bool sad_enabled;
  QTable p1;
  QTable p2;

  int p2_index(const P2Key& key) const;
  P2Key p2_key(int card, int env_action, int p1_greedy) const;
};

struct TabularConfig {
  double learning_rate = 0.01;
  // Constant exploration, then linear decay to 0 over the final
  // `decay_fraction` of the episodes.
  double epsilon = 0.1;
  double decay_fraction = 0.1;
  long episodes = 100000;
  int seeds = 100;
  bool sad_enabled = true;
  long eval_every = 1000;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0: hardware concurrency
  matrix_game::PayoffTensor payoff = matrix_game::default_payoff();

  void validate() const;
};

double epsilon_at(const TabularConfig& cfg, long episode);

struct EpisodeOutcome {
  double reward = 0.0;
  int c1 = 0, c2 = 0, a1 = 0, a2 = 0;
  int p1_greedy = 0;
  P2Key p2_key;
};

// Plays one epsilon-greedy episode and applies the one-step Q-learning update
// to both tables. Both targets are the terminal reward.
EpisodeOutcome run_episode(TabularAgents& agents, const TabularConfig& cfg, double epsilon,
                           RngStream& rng);

enum class GreedySlotSource { kSideChannel, kExecutedAction };

// Exact expected return of the greedy joint policy over the four deals.
double evaluate(const TabularAgents& agents, const matrix_game::PayoffTensor& payoff,
                GreedySlotSource source = GreedySlotSource::kExecutedAction);

struct CurveRow {
  int seed;
  long episode;
  double eval_return;
};

struct ExperimentResult {
  double mean = 0.0;
  double sem = 0.0;
  std::vector<double> per_seed;
  std::vector<CurveRow> curve;
};

TabularAgents train_seed(const TabularConfig& cfg, int seed_index, std::vector<CurveRow>* curve);

ExperimentResult experiment(const TabularConfig& cfg);

std::string curve_csv(const std::vector<CurveRow>& rows);

}  // namespace sad::tabular
