#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sad::replay {

// One stored training sample: a whole episode. In joint (VDN) mode the
// record holds every agent; in independent mode each agent writes its own
// record with num_agents = 1.
//
// Layout, all row-major with the agent index innermost before features:
//   obs     (T+1) x A x obs_dim   row T is the observation after the last
//                                 step, used to bootstrap truncated episodes
//   legal   (T+1) x A x num_actions
//   action  T x A                 executed action
//   greedy  T x A                 greedy action
//   acting  T x A                 1 where the agent had a real choice
//   reward  T
//   aux     T x A x aux_slots     class id per card slot, -1 when empty
//                                 (absent when aux_slots == 0)
struct EpisodeRecord {
  int num_agents = 1;
  int obs_dim = 0;
  int num_actions = 0;
  int aux_slots = 0;
  int length = 0;
  bool truncated = false;

  std::vector<float> obs;
  std::vector<std::uint8_t> legal;
  std::vector<std::int16_t> action;
  std::vector<std::int16_t> greedy;
  std::vector<std::uint8_t> acting;
  std::vector<float> reward;
  std::vector<std::int8_t> aux;

  // Allocates all buffers for `length` steps.
  void resize(int agents, int obs_dim, int actions, int aux_slots, int length);

  std::span<float> obs_at(int t, int a) {
    return {obs.data() + (static_cast<std::size_t>(t) * num_agents + a) * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
  std::span<const float> obs_at(int t, int a) const {
    return {obs.data() + (static_cast<std::size_t>(t) * num_agents + a) * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
  std::span<std::uint8_t> legal_at(int t, int a) {
    return {legal.data() + (static_cast<std::size_t>(t) * num_agents + a) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }
  std::span<const std::uint8_t> legal_at(int t, int a) const {
    return {legal.data() + (static_cast<std::size_t>(t) * num_agents + a) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }
  std::size_t step_index(int t, int a) const { return static_cast<std::size_t>(t) * num_agents + a; }

  // Throws ShapeError when field sizes disagree with the header, or when an
  // acting agent lacks a legal executed/greedy action.
  void validate() const;
  std::size_t bytes() const;
};

}  // namespace sad::replay
