#include "sad/replay/buffer.hpp"

#include <algorithm>
#include <cmath>

#include "sad/core/error.hpp"

namespace sad::replay {

double episode_priority(std::span<const double> td_errors, double eta) {
  if (td_errors.empty()) return 0.0;
  double mx = 0.0, sum = 0.0;
  for (double d : td_errors) {
    const double a = std::abs(d);
    mx = std::max(mx, a);
    sum += a;
  }
  return eta * mx + (1.0 - eta) * sum / static_cast<double>(td_errors.size());
}

PrioritizedReplay::PrioritizedReplay(ReplayConfig config)
    : config_(config),
      tree_(config.capacity == 0 ? throw ConfigError("replay capacity must be positive") : config.capacity),
      slots_(config.capacity),
      slot_ids_(config.capacity, ~EpisodeId{0}),
      raw_priority_(config.capacity, 0.0) {
  if (config.priority_exponent < 0.0 || config.is_exponent < 0.0) throw ConfigError("replay exponents must be >= 0");
  if (config.eta < 0.0 || config.eta > 1.0) throw ConfigError("replay eta must lie in [0, 1]");
}

double PrioritizedReplay::scaled(double priority) const {
  if (!(priority >= 0.0) || !std::isfinite(priority)) throw DomainError("replay priority must be finite and >= 0");
  return std::pow(priority, config_.priority_exponent);
}

EpisodeId PrioritizedReplay::add(EpisodeRecord episode, double priority) {
  return add(std::make_shared<const EpisodeRecord>(std::move(episode)), priority);
}

EpisodeId PrioritizedReplay::add(std::shared_ptr<const EpisodeRecord> episode, double priority) {
  const double p = scaled(priority);
  std::shared_ptr<const EpisodeRecord> evicted;
  std::lock_guard lock(mu_);
  const EpisodeId id = next_id_++;
  const std::size_t slot = id % config_.capacity;
  evicted = std::move(slots_[slot]);  // released after the lock
  slots_[slot] = std::move(episode);
  slot_ids_[slot] = id;
  raw_priority_[slot] = priority;
  tree_.set(slot, p);
  size_.store(std::min<std::size_t>(next_id_, config_.capacity), std::memory_order_release);
  return id;
}

bool PrioritizedReplay::live(EpisodeId id) const {
  return id < next_id_ && slot_ids_[id % config_.capacity] == id;
}

SampledBatch PrioritizedReplay::sample(std::size_t batch, RngStream& rng) {
  if (batch == 0) throw DomainError("replay: batch size must be positive");
  if (!ready()) {
    throw DomainError("replay: sampling before warm-up (" + std::to_string(size()) + " < " +
                      std::to_string(config_.warmup) + " episodes)");
  }
  SampledBatch out;
  out.episodes.reserve(batch);
  out.weights.reserve(batch);
  out.ids.reserve(batch);
  std::lock_guard lock(mu_);
  const std::size_t n = std::min<std::size_t>(next_id_, config_.capacity);
  const double total = tree_.total();
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t slot;
    double prob;
    if (total > 0.0) {
      double mass = rng.uniform() * total;
      slot = tree_.find(std::min(mass, std::nextafter(total, 0.0)));
      prob = tree_.get(slot) / total;
    } else {
      slot = static_cast<std::size_t>(rng.uniform_int(n));
      prob = 1.0 / static_cast<double>(n);
    }
    out.episodes.push_back(slots_[slot]);
    out.ids.push_back(slot_ids_[slot]);
    out.weights.push_back(std::pow(static_cast<double>(n) * prob, -config_.is_exponent));
  }
  const double max_w = *std::max_element(out.weights.begin(), out.weights.end());
  for (double& w : out.weights) w /= max_w;
  sampled_.fetch_add(batch, std::memory_order_relaxed);
  return out;
}

void PrioritizedReplay::update_priorities(std::span<const EpisodeId> ids,
                                          std::span<const std::vector<double>> td_errors) {
  if (ids.size() != td_errors.size()) throw ShapeError("replay: ids and td error lists differ in length");
  std::vector<double> p(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) p[i] = episode_priority(td_errors[i], config_.eta);
  set_priorities(ids, p);
}

void PrioritizedReplay::set_priorities(std::span<const EpisodeId> ids, std::span<const double> priorities) {
  if (ids.size() != priorities.size()) throw ShapeError("replay: ids and priorities differ in length");
  std::vector<double> scaled_p(priorities.size());
  for (std::size_t i = 0; i < priorities.size(); ++i) scaled_p[i] = scaled(priorities[i]);
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!live(ids[i])) continue;
    const std::size_t slot = ids[i] % config_.capacity;
    raw_priority_[slot] = priorities[i];
    tree_.set(slot, scaled_p[i]);
  }
}

ReplayCounters PrioritizedReplay::counters() const {
  std::lock_guard lock(mu_);
  return ReplayCounters{std::min<std::size_t>(next_id_, config_.capacity), next_id_,
                        sampled_.load(std::memory_order_relaxed)};
}

double PrioritizedReplay::priority(EpisodeId id) const {
  std::lock_guard lock(mu_);
  return live(id) ? raw_priority_[id % config_.capacity] : -1.0;
}

double PrioritizedReplay::tree_total() const {
  std::lock_guard lock(mu_);
  return tree_.total();
}

double PrioritizedReplay::tree_brute_total() const {
  std::lock_guard lock(mu_);
  return tree_.brute_total();
}

std::vector<EpisodeId> PrioritizedReplay::live_ids() const {
  std::lock_guard lock(mu_);
  std::vector<EpisodeId> ids;
  const std::size_t n = std::min<std::size_t>(next_id_, config_.capacity);
  for (EpisodeId id = next_id_ - n; id < next_id_; ++id) ids.push_back(id);
  return ids;
}

}  // namespace sad::replay
