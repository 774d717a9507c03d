#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sad/harness/actor.hpp"
#include "sad/nn/checkpoint.hpp"

namespace sad::harness {

struct EvalResult {
  int games = 0;
  double mean = 0.0;
  double sem = 0.0;
  std::array<int, hanabi::kMaxScore + 1> histogram{};
  double win_rate = 0.0;
  std::vector<int> scores;
  // Executed move ids per game, filled when requested.
  std::vector<std::vector<int>> moves;
};

struct EvalOptions {
  int players = 2;
  bool sad = true;
  int max_steps = hanabi::kDefaultMaxSteps;
  train::SlotSource slot_source = train::SlotSource::kExecutedAction;
  bool record_moves = false;
  int batch = 256;  // games stepped together
};

// Greedy (epsilon = 0) play, each agent seeing only its own observation.
// Game g uses seed mix64(seed + g). Throws DomainError for games <= 0.
EvalResult evaluate_policy(const nn::NetworkParams<float>& params, const EvalOptions& opts, int games,
                           std::uint64_t seed);

// Uniform random legal play over the same seeds.
EvalResult random_policy_baseline(int players, int games, std::uint64_t seed,
                                  int max_steps = hanabi::kDefaultMaxSteps);

EvalResult summarize_scores(std::vector<int> scores);

// Metadata keys written with every checkpoint.
nn::Checkpoint make_checkpoint(const nn::NetworkParams<float>& params, const ActorConfig& cfg);

// Loads and evaluates a checkpoint. Throws ConfigError when the stored
// encoder version differs from this build and DomainError for games <= 0.
EvalResult evaluate_checkpoint(const std::filesystem::path& dir, int games, std::uint64_t seed);

}  // namespace sad::harness
