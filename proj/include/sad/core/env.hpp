#pragma once

#include <optional>
#include <vector>

#include "sad/core/error.hpp"

namespace sad {

// Index of an agent inside one game, in [0, num_agents).
struct AgentId {
  int index = 0;
  friend bool operator==(AgentId, AgentId) = default;
};

// What one agent sees. `features` excludes the greedy-action slot; callers
// that train with the SAD channel append it through the game's encoder.
struct AgentObservation {
  std::vector<float> features;
  std::vector<bool> legal;           // one entry per action id, noop included
  std::optional<int> last_action;    // last executed action of the acting agent
  friend bool operator==(const AgentObservation&, const AgentObservation&) = default;
};

struct StepResult {
  double reward = 0.0;  // shared team reward
  bool done = false;
  bool truncated = false;
};

// Turn-based, fully cooperative Dec-POMDP. At every non-terminal step exactly
// one agent has non-noop legal actions; every other agent must submit noop.
class TurnBasedEnv {
 public:
  virtual ~TurnBasedEnv() = default;

  virtual int num_agents() const = 0;
  // Action ids are [0, num_actions()); noop_action() is one of them.
  virtual int num_actions() const = 0;
  virtual int noop_action() const = 0;

  virtual bool terminal() const = 0;
  virtual AgentId acting_agent() const = 0;
  virtual std::vector<bool> legal_actions(AgentId agent) const = 0;

  // Joint action holds one id per agent. Throws RuleViolation naming the
  // broken rule, or "episode finished" when called on a terminal state.
  virtual StepResult step(const std::vector<int>& joint_action) = 0;

  virtual AgentObservation observe(AgentId agent) const = 0;
};

// Checks the turn-based contract shared by every environment: the acting
// agent submits a legal non-noop, every other agent submits noop.
void check_joint_action(const TurnBasedEnv& env, const std::vector<int>& joint_action);

}  // namespace sad
