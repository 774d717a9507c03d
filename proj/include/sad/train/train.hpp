#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sad/core/rng.hpp"
#include "sad/nn/adam.hpp"
#include "sad/nn/network.hpp"
#include "sad/replay/buffer.hpp"

namespace sad::train {

using nn::Matrix;
using nn::NetworkParams;
using nn::RecurrentState;

enum class Mode { kIql, kVdn };

struct TrainConfig {
  Mode mode = Mode::kVdn;
  bool sad = true;
  bool aux = false;
  double gamma = 0.999;
  int n_step = 3;
  int target_sync_every = 2500;
  int actor_sync_every = 10;
  double aux_weight = 1.0;
  int batch_size = 64;
  double grad_clip = 5.0;
  nn::AdamConfig adam;

  // Throws ConfigError.
  void validate() const;
};

// Index of the largest legal entry, ties to the lowest id. Throws
// DomainError when nothing is legal.
int masked_argmax(std::span<const float> q, std::span<const std::uint8_t> legal);

struct ActOutput {
  std::vector<int> env_action;
  std::vector<int> greedy_action;
  Matrix<float> q;  // num_actions x batch
  RecurrentState<float> state;
};

// One recurrent step for a batch of agents. Column b of `obs` is agent b,
// `legal` is batch x num_actions row-major. Agents whose only legal action
// is the pass action get it back; their hidden state still advances.
ActOutput act(const NetworkParams<float>& params, const Matrix<float>& obs, std::span<const std::uint8_t> legal,
              const RecurrentState<float>& state, std::span<const double> epsilon, RngStream& rng);

// Where the greedy-action input comes from.
enum class SlotSource {
  kSideChannel,     // training: the acting agent's greedy action
  kExecutedAction,  // deployment: the action the environment executed
};

struct PreviousStep {
  int actor;
  int greedy_action;
  int executed_action;
};

// Greedy-slot content for `observer` at the next step; nullopt is NONE
// (used at step 0 and for the agent that acted).
std::optional<int> sad_input(std::optional<PreviousStep> previous, int observer, SlotSource source);

// Sampled episodes padded to a common length. Network columns are laid out
// as (t * batch + b) * agents + a over steps + 1 rows.
struct TrainBatch {
  int batch = 0;
  int agents = 0;
  int steps = 0;  // longest episode
  int obs_dim = 0;
  int num_actions = 0;
  int aux_slots = 0;
  Matrix<float> obs;                 // obs_dim x (steps + 1) * batch * agents
  std::vector<std::uint8_t> legal;   // (steps + 1) x batch x agents x num_actions
  std::vector<int> action;           // steps x batch x agents
  std::vector<std::uint8_t> acting;  // steps x batch x agents
  std::vector<float> reward;         // steps x batch
  std::vector<int> aux;              // steps x batch x agents x aux_slots, -1 when absent
  std::vector<int> length;
  std::vector<std::uint8_t> truncated;

  int columns_per_step() const { return batch * agents; }
  int column(int t, int b, int a) const { return (t * batch + b) * agents + a; }
  std::size_t sa(int t, int b, int a) const { return static_cast<std::size_t>(column(t, b, a)); }
};

// Throws ShapeError on inconsistent episodes.
TrainBatch assemble_batch(std::span<const std::shared_ptr<const replay::EpisodeRecord>> episodes);

// Targets and validity per (t, b). In joint mode every step of every episode
// is valid; in independent mode (agents == 1) only the agent's acting steps.
struct Targets {
  int steps = 0;
  int batch = 0;
  std::vector<double> y;
  std::vector<std::uint8_t> valid;

  std::size_t index(int t, int b) const { return static_cast<std::size_t>(t) * batch + b; }
};

// n-step double-Q targets from precomputed Q values in the batch column
// layout. Joint mode bootstraps with the sum over agents of the target
// network's value at each agent's online-greedy legal action. The horizon
// shortens near the episode end; truncated episodes bootstrap from the final
// observation. Independent mode counts n in environment steps and bootstraps
// at the agent's first acting step at or after t + n.
Targets compute_targets(const TrainBatch& batch, const Matrix<float>& q_online, const Matrix<float>& q_target,
                        Mode mode, double gamma, int n_step);
Targets compute_targets(const TrainBatch& batch, const NetworkParams<float>& online,
                        const NetworkParams<float>& target, const TrainConfig& cfg);

// Sum over agents of Q(u_a) at (t, b), summed in agent order.
double joint_q(const TrainBatch& batch, const Matrix<float>& q, int t, int b);

struct LossReport {
  double td_loss = 0.0;
  double aux_loss = 0.0;
  double total = 0.0;
  // Per episode |TD error| at each valid step, for priority updates.
  std::vector<std::vector<double>> td_errors;
};

// td_loss = sum(w * delta^2) / (#valid steps); aux_loss = mean per-card
// cross entropy. Fills dLoss/dQ and dLoss/dAux when the pointers are set.
// Throws NumericError when a loss is not finite.
LossReport compute_loss(const TrainBatch& batch, const Matrix<float>& q, const Matrix<float>& aux_logits,
                        const Targets& targets, std::span<const double> weights, const TrainConfig& cfg,
                        Matrix<float>* d_q = nullptr, Matrix<float>* d_aux = nullptr);

// Convenience: forward pass with `params`, then compute_loss.
LossReport compute_loss(const TrainBatch& batch, const NetworkParams<float>& params, const Targets& targets,
                        std::span<const double> weights, const TrainConfig& cfg);

// Priority of a freshly collected episode from the Q values its actor
// recorded (online and target both taken to be the actor's snapshot).
std::vector<double> actor_td_errors(const replay::EpisodeRecord& episode, const Matrix<float>& q, Mode mode,
                                    double gamma, int n_step);

struct UpdateReport {
  long update = 0;
  double td_loss = 0.0;
  double aux_loss = 0.0;
  double grad_norm = 0.0;
};

// Online/target networks plus optimizer; one update = sample, targets,
// loss, backward, clip, Adam step, priority update.
class Trainer {
 public:
  Trainer(NetworkParams<float> init, TrainConfig cfg);

  UpdateReport update(replay::PrioritizedReplay& replay, RngStream& rng);
  UpdateReport update_on(std::span<const std::shared_ptr<const replay::EpisodeRecord>> episodes,
                         std::span<const double> weights, LossReport* report = nullptr);

  const NetworkParams<float>& online() const { return online_; }
  const NetworkParams<float>& target() const { return target_; }
  long updates() const { return updates_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  NetworkParams<float> online_;
  NetworkParams<float> target_;
  nn::Adam<float> adam_;
  long updates_ = 0;
};

}  // namespace sad::train
