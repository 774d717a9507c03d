#include "sad/core/env.hpp"

#include <string>

namespace sad {

void check_joint_action(const TurnBasedEnv& env, const std::vector<int>& joint_action) {
  if (env.terminal()) throw RuleViolation("episode finished");
  if (static_cast<int>(joint_action.size()) != env.num_agents()) {
    throw RuleViolation("joint action must hold one action per agent");
  }
  const int actor = env.acting_agent().index;
  for (int a = 0; a < env.num_agents(); ++a) {
    const int u = joint_action[a];
    if (u < 0 || u >= env.num_actions()) {
      throw RuleViolation("action id " + std::to_string(u) + " out of range");
    }
    if (a != actor && u != env.noop_action()) {
      throw RuleViolation("agent " + std::to_string(a) + " is not acting and must pass");
    }
  }
  if (joint_action[actor] == env.noop_action()) {
    throw RuleViolation("acting agent " + std::to_string(actor) + " may not pass");
  }
  if (!env.legal_actions(AgentId{actor})[joint_action[actor]]) {
    throw RuleViolation("action " + std::to_string(joint_action[actor]) +
                        " is illegal for acting agent " + std::to_string(actor));
  }
}

}  // namespace sad
