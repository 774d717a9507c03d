#include "sad/replay/episode.hpp"

#include <string>

#include "sad/core/error.hpp"

namespace sad::replay {

void EpisodeRecord::resize(int agents, int obs_dim_, int actions, int aux_slots_, int length_) {
  if (agents < 1 || obs_dim_ < 1 || actions < 1 || aux_slots_ < 0 || length_ < 1) {
    throw ShapeError("episode record: invalid dimensions");
  }
  num_agents = agents;
  obs_dim = obs_dim_;
  num_actions = actions;
  aux_slots = aux_slots_;
  length = length_;
  const std::size_t steps = static_cast<std::size_t>(length_) * agents;
  const std::size_t rows = steps + agents;
  obs.assign(rows * obs_dim_, 0.0f);
  legal.assign(rows * actions, 0);
  action.assign(steps, 0);
  greedy.assign(steps, 0);
  acting.assign(steps, 0);
  reward.assign(length_, 0.0f);
  aux.assign(steps * aux_slots_, -1);
}

void EpisodeRecord::validate() const {
  if (num_agents < 1 || obs_dim < 1 || num_actions < 1 || length < 1) throw ShapeError("episode record: empty header");
  const std::size_t steps = static_cast<std::size_t>(length) * num_agents;
  const std::size_t rows = steps + num_agents;
  if (obs.size() != rows * obs_dim || legal.size() != rows * num_actions || action.size() != steps ||
      greedy.size() != steps || acting.size() != steps || reward.size() != static_cast<std::size_t>(length) ||
      aux.size() != steps * aux_slots) {
    throw ShapeError("episode record: field lengths disagree with header");
  }
  for (int t = 0; t < length; ++t) {
    for (int a = 0; a < num_agents; ++a) {
      const std::size_t k = step_index(t, a);
      const auto mask = legal_at(t, a);
      for (int u : {static_cast<int>(action[k]), static_cast<int>(greedy[k])}) {
        if (u < 0 || u >= num_actions || !mask[u]) {
          throw ShapeError("episode record: illegal action at step " + std::to_string(t));
        }
      }
    }
  }
}

std::size_t EpisodeRecord::bytes() const {
  return obs.size() * sizeof(float) + legal.size() + (action.size() + greedy.size()) * sizeof(std::int16_t) +
         acting.size() + reward.size() * sizeof(float) + aux.size();
}

}  // namespace sad::replay
