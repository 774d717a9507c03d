#pragma once

#include <optional>

#include "sad/core/env.hpp"
#include "sad/core/rng.hpp"
#include "sad/matrix_game/payoff.hpp"

namespace sad::matrix_game {

enum class Phase { kP1ToAct, kP2ToAct, kDone };

struct MatrixState {
  int c1 = 0;
  int c2 = 0;
  Phase phase = Phase::kP1ToAct;
  std::optional<int> a1;
};

// Two-player, two-step environment. Observation layout: own card one-hot (2)
// followed by the P1 action one-hot (3), zero until P1 has acted.
class MatrixGame final : public TurnBasedEnv {
 public:
  static constexpr int kNoop = kNumActions;
  static constexpr int kFeatureDim = kNumCards + kNumActions;

  MatrixGame(const PayoffTensor& payoff, RngStream& rng);
  MatrixGame(const PayoffTensor& payoff, int c1, int c2);

  int num_agents() const override { return 2; }
  int num_actions() const override { return kNumActions + 1; }
  int noop_action() const override { return kNoop; }

  bool terminal() const override { return state_.phase == Phase::kDone; }
  AgentId acting_agent() const override;
  std::vector<bool> legal_actions(AgentId agent) const override;
  StepResult step(const std::vector<int>& joint_action) override;
  AgentObservation observe(AgentId agent) const override;

  const MatrixState& state() const { return state_; }

 private:
  PayoffTensor payoff_;
  MatrixState state_;
};

}  // namespace sad::matrix_game
