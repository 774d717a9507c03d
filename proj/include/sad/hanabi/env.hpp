#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sad/core/env.hpp"
#include "sad/hanabi/encoder.hpp"

namespace sad::hanabi {

// TurnBasedEnv adapter over HanabiState. Observations use the encoder
// without the greedy slot; agents that train with SAD encode it themselves.
class HanabiEnv final : public TurnBasedEnv {
 public:
  HanabiEnv(int players, std::uint64_t seed, int max_steps = kDefaultMaxSteps);
  explicit HanabiEnv(HanabiState state);

  int num_agents() const override { return state_.players(); }
  int num_actions() const override { return state_.codec().num_actions(); }
  int noop_action() const override { return state_.codec().noop(); }

  bool terminal() const override { return state_.terminal(); }
  AgentId acting_agent() const override { return AgentId{state_.current_player()}; }
  std::vector<bool> legal_actions(AgentId agent) const override;
  StepResult step(const std::vector<int>& joint_action) override;
  AgentObservation observe(AgentId agent) const override;

  const HanabiState& state() const { return state_; }

 private:
  HanabiState state_;
  ObservationEncoder encoder_;
};

// Text replay format:
//   players <P>
//   seed <S>
//   max_steps <M>        (optional, default 80)
//   moves <id> <id> ...
struct GameReplay {
  int players = 2;
  std::uint64_t seed = 0;
  int max_steps = kDefaultMaxSteps;
  std::vector<int> moves;
};

GameReplay parse_replay(const std::string& text);
GameReplay load_replay(const std::filesystem::path& path);
std::string format_replay(const GameReplay& replay);

struct ReplayResult {
  HanabiState state;
  double episode_return = 0.0;
};

// Re-executes the move list from the seeded deal; throws on illegal moves.
ReplayResult run_replay(const GameReplay& replay);

}  // namespace sad::hanabi
