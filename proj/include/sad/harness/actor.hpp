#pragma once

#include <optional>
#include <vector>

#include "sad/hanabi/encoder.hpp"
#include "sad/hanabi/state.hpp"
#include "sad/replay/episode.hpp"
#include "sad/train/train.hpp"

namespace sad::harness {

// eps_i = base^(1 + alpha * i / (n - 1)); n = 1 gives {base}.
std::vector<double> actor_epsilons(int n, double base = 0.1, double alpha = 7.0);

struct ActorConfig {
  int players = 2;
  int max_steps = hanabi::kDefaultMaxSteps;
  bool sad = true;
  bool aux = false;
  train::Mode mode = train::Mode::kVdn;
  double gamma = 0.999;
  int n_step = 3;
  double eta = 0.9;
  train::SlotSource slot_source = train::SlotSource::kSideChannel;
};

// Network shape matching the encoder for this configuration.
nn::NetworkShape network_shape(const ActorConfig& cfg, int hidden_dim, int lstm_layers);

struct FinishedEpisode {
  // One joint record, or one record per agent in independent mode.
  std::vector<replay::EpisodeRecord> records;
  std::vector<double> priorities;
  double episode_return = 0.0;
  int score = 0;
  int length = 0;
};

// K games stepped in lockstep with one batched forward pass per step over
// all K * players agent columns.
class HanabiActor {
 public:
  // One epsilon per game; game seeds are drawn from `rng`.
  HanabiActor(ActorConfig cfg, std::vector<double> epsilons, RngStream rng);

  // Advances every game by one environment step. Finished games are
  // appended to `out` and restarted.
  void step(const nn::NetworkParams<float>& params, std::vector<FinishedEpisode>& out);

  int games() const { return static_cast<int>(envs_.size()); }
  long env_steps() const { return env_steps_; }
  long episodes() const { return episodes_; }
  const ActorConfig& config() const { return cfg_; }

 private:
  struct Game {
    hanabi::HanabiState state;
    replay::EpisodeRecord record;
    nn::Matrix<float> q;  // num_actions x (max_steps + 1) * players
    std::optional<train::PreviousStep> previous;
    double episode_return = 0.0;
    int t = 0;
  };

  void reset(std::size_t k);
  void write_observation(std::size_t k, int row);
  FinishedEpisode finish(std::size_t k, const nn::NetworkParams<float>& params);

  ActorConfig cfg_;
  hanabi::ObservationEncoder encoder_;
  std::vector<double> epsilons_;
  RngStream rng_;
  std::vector<Game> envs_;
  nn::RecurrentState<float> state_;
  nn::Matrix<float> obs_;
  std::vector<std::uint8_t> legal_;
  std::vector<double> column_eps_;
  long env_steps_ = 0;
  long episodes_ = 0;
  bool state_ready_ = false;
};

}  // namespace sad::harness
