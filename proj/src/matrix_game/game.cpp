#include "sad/matrix_game/game.hpp"

namespace sad::matrix_game {

MatrixGame::MatrixGame(const PayoffTensor& payoff, RngStream& rng) : payoff_(payoff) {
  state_.c1 = static_cast<int>(rng.uniform_int(kNumCards));
  state_.c2 = static_cast<int>(rng.uniform_int(kNumCards));
}

MatrixGame::MatrixGame(const PayoffTensor& payoff, int c1, int c2) : payoff_(payoff) {
  if (c1 < 0 || c1 >= kNumCards || c2 < 0 || c2 >= kNumCards) {
    throw DomainError("matrix game card out of range");
  }
  state_.c1 = c1;
  state_.c2 = c2;
}

AgentId MatrixGame::acting_agent() const {
  return AgentId{state_.phase == Phase::kP1ToAct ? 0 : 1};
}

std::vector<bool> MatrixGame::legal_actions(AgentId agent) const {
  std::vector<bool> legal(kNumActions + 1, false);
  if (terminal() || agent.index != acting_agent().index) {
    legal[kNoop] = true;
    return legal;
  }
  for (int a = 0; a < kNumActions; ++a) legal[a] = true;
  return legal;
}

StepResult MatrixGame::step(const std::vector<int>& joint_action) {
  check_joint_action(*this, joint_action);
  StepResult r;
  if (state_.phase == Phase::kP1ToAct) {
    state_.a1 = joint_action[0];
    state_.phase = Phase::kP2ToAct;
    return r;
  }
  r.reward = payoff_.at(state_.c1, state_.c2, *state_.a1, joint_action[1]);
  r.done = true;
  state_.phase = Phase::kDone;
  return r;
}

AgentObservation MatrixGame::observe(AgentId agent) const {
  AgentObservation obs;
  obs.features.assign(kFeatureDim, 0.0f);
  obs.features[agent.index == 0 ? state_.c1 : state_.c2] = 1.0f;
  if (state_.a1) {
    obs.features[kNumCards + *state_.a1] = 1.0f;
    obs.last_action = state_.a1;
  }
  obs.legal = legal_actions(agent);
  return obs;
}

}  // namespace sad::matrix_game
