#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "sad/core/rng.hpp"
#include "sad/replay/episode.hpp"
#include "sad/replay/sum_tree.hpp"

namespace sad::replay {

struct ReplayConfig {
  std::size_t capacity = std::size_t{1} << 17;
  std::size_t warmup = 10000;
  double priority_exponent = 0.9;
  double is_exponent = 0.6;
  double eta = 0.9;
};

// eta * max + (1 - eta) * mean of |td|; 0 for an empty list.
double episode_priority(std::span<const double> td_errors, double eta = 0.9);

using EpisodeId = std::uint64_t;

struct SampledBatch {
  std::vector<std::shared_ptr<const EpisodeRecord>> episodes;
  std::vector<double> weights;
  std::vector<EpisodeId> ids;
};

struct ReplayCounters {
  std::size_t size = 0;
  std::uint64_t added = 0;
  std::uint64_t sampled = 0;
};

// Ring buffer of episodes with proportional prioritized sampling. Episodes
// are published whole under a short lock; sampled episodes are shared, so
// eviction never invalidates a batch in flight. Ids name an insertion, and
// an id whose slot has since been overwritten is stale.
class PrioritizedReplay {
 public:
  explicit PrioritizedReplay(ReplayConfig config);

  const ReplayConfig& config() const { return config_; }

  EpisodeId add(EpisodeRecord episode, double priority);
  EpisodeId add(std::shared_ptr<const EpisodeRecord> episode, double priority);

  bool ready() const { return size() >= config_.warmup; }
  // Throws DomainError before warm-up or for batch == 0.
  SampledBatch sample(std::size_t batch, RngStream& rng);

  // Stale ids are ignored.
  void update_priorities(std::span<const EpisodeId> ids, std::span<const std::vector<double>> td_errors);
  void set_priorities(std::span<const EpisodeId> ids, std::span<const double> priorities);

  std::size_t size() const { return size_.load(std::memory_order_acquire); }
  ReplayCounters counters() const;
  // Raw (un-exponentiated) priority of a live id, or -1 when stale.
  double priority(EpisodeId id) const;
  // Stored tree total vs. a fresh sum of all leaves.
  double tree_total() const;
  double tree_brute_total() const;
  // Ids currently stored, oldest first.
  std::vector<EpisodeId> live_ids() const;

 private:
  double scaled(double priority) const;
  bool live(EpisodeId id) const;

  ReplayConfig config_;
  mutable std::mutex mu_;
  SumTree tree_;
  std::vector<std::shared_ptr<const EpisodeRecord>> slots_;
  std::vector<EpisodeId> slot_ids_;
  std::vector<double> raw_priority_;
  EpisodeId next_id_ = 0;
  std::atomic<std::size_t> size_{0};
  std::atomic<std::uint64_t> sampled_{0};
};

}  // namespace sad::replay
