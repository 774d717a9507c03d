#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sad/harness/actor.hpp"
#include "sad/harness/evaluate.hpp"
#include "sad/replay/buffer.hpp"

namespace sad::harness {

struct RunnerConfig {
  int actor_threads = 4;
  int envs_per_thread = 16;
  double base_epsilon = 0.1;
  double alpha = 7.0;
  int players = 2;
  int max_steps = hanabi::kDefaultMaxSteps;
  int hidden_dim = 512;
  int lstm_layers = 2;
  std::uint64_t seed = 1;

  int eval_games = 1000;
  long eval_every = 1000;  // updates between evaluations
  long log_every = 50;     // updates between log rows
  long checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path log_path;

  double time_budget_seconds = 0.0;  // 0: no limit
  long max_updates = 0;              // 0: no limit
  std::optional<double> stop_at_eval;

  // Environment steps collected per trainer update after warm-up. Threaded
  // actors pause when they get further ahead than this; 0 disables the
  // limit (threaded mode only).
  int env_steps_per_update = 16;
  // Single-threaded schedule: N = 1 actor, one update every
  // env_steps_per_update environment steps, inline evaluation.
  bool deterministic = false;
  // Recompute the snapshot checksum on every actor read.
  bool verify_snapshots = false;

  replay::ReplayConfig replay;
  train::TrainConfig train;

  void validate() const;
  ActorConfig actor_config() const;
  nn::NetworkShape network_shape() const;

  // Full-size settings (80 x 80 actors, 512 units, 72 h).
  static RunnerConfig full_scale(int players, train::Mode mode);
  // Settings sized for a desktop: 4 x 16 actors, smaller replay and net.
  static RunnerConfig desk_scale(int players, train::Mode mode);
};

struct LogRow {
  long update = 0;
  double td_loss = 0.0;
  double aux_loss = 0.0;
  std::size_t buffer_size = 0;
  std::optional<double> eval_score;
  long env_steps = 0;
  double seconds = 0.0;
};

struct EvalPoint {
  long update = 0;
  long env_steps = 0;
  double seconds = 0.0;
  double mean = 0.0;
  double sem = 0.0;
};

struct RunMetrics {
  double env_steps_per_sec = 0.0;
  double episodes_per_sec = 0.0;
  double updates_per_sec = 0.0;
  double eval_mean = 0.0;
  double eval_sem = 0.0;
  long env_steps = 0;
  long episodes = 0;
  long updates = 0;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<LogRow> log;
  std::vector<EvalPoint> evals;
  RunMetrics metrics;
  EvalResult random_baseline;
  bool losses_finite = true;
  bool counters_monotone = true;
  nn::NetworkParams<float> params;
};

// Published parameters; a snapshot is immutable once handed out.
struct Snapshot {
  std::shared_ptr<const nn::NetworkParams<float>> params;
  std::uint64_t version = 0;
  std::uint64_t checksum = 0;
};

class ParamStore {
 public:
  void publish(const nn::NetworkParams<float>& params);
  Snapshot latest() const;
  std::uint64_t version() const { return version_.load(std::memory_order_acquire); }

 private:
  mutable std::mutex mu_;
  Snapshot current_;
  std::atomic<std::uint64_t> version_{0};
};

// Throws InvariantViolation when the snapshot's checksum does not match.
void verify_snapshot(const Snapshot& s);

using LogCallback = std::function<void(const LogRow&)>;

// Throws ConfigError for an inconsistent config, IoError for checkpoint or
// log failures, NumericError when a loss stops being finite.
RunResult run_training(const RunnerConfig& cfg, const LogCallback& on_log = {});

// Training log CSV (header update,td_loss,aux_loss,buffer_size,eval_score).
std::string log_header();
std::string format_log_row(const LogRow& row);

struct ThroughputResult {
  long env_steps = 0;
  double seconds = 0.0;
  double steps_per_sec = 0.0;
};

// Single actor thread stepping K games for at least `min_seconds`.
ThroughputResult measure_throughput(const ActorConfig& cfg, const nn::NetworkParams<float>& params, int games,
                                    double min_seconds, std::uint64_t seed);

}  // namespace sad::harness
