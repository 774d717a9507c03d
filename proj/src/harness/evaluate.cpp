#include "sad/harness/evaluate.hpp"

#include <algorithm>
#include <string>

#include "sad/core/error.hpp"
#include "sad/core/stats.hpp"

namespace sad::harness {

EvalResult summarize_scores(std::vector<int> scores) {
  EvalResult r;
  r.games = static_cast<int>(scores.size());
  std::vector<double> values(scores.begin(), scores.end());
  const auto ms = mean_sem(values);
  r.mean = ms.mean;
  r.sem = ms.sem;
  int wins = 0;
  for (int s : scores) {
    r.histogram[std::clamp(s, 0, hanabi::kMaxScore)]++;
    wins += s == hanabi::kMaxScore;
  }
  r.win_rate = scores.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(scores.size());
  r.scores = std::move(scores);
  return r;
}

EvalResult evaluate_policy(const nn::NetworkParams<float>& params, const EvalOptions& opts, int games,
                           std::uint64_t seed) {
  if (games <= 0) throw DomainError("evaluation needs at least one game");
  const hanabi::ObservationEncoder enc(opts.players, opts.sad);
  if (params.shape().input_dim != enc.feature_dim() || params.shape().num_actions != enc.num_actions()) {
    throw ShapeError("network does not match the observation encoder");
  }
  const int p = opts.players, u = enc.num_actions();
  std::vector<int> scores(games);
  std::vector<std::vector<int>> moves(opts.record_moves ? games : 0);
  RngStream unused(0, 0);

  for (int start = 0; start < games; start += opts.batch) {
    const int n = std::min(opts.batch, games - start);
    std::vector<hanabi::HanabiState> states;
    std::vector<std::optional<train::PreviousStep>> prev(n);
    for (int i = 0; i < n; ++i) {
      states.push_back(hanabi::HanabiState::new_game(p, mix64(seed + static_cast<std::uint64_t>(start + i)), opts.max_steps));
    }
    auto rstate = nn::RecurrentState<float>::zeros(params.shape(), n * p);
    nn::Matrix<float> obs(enc.feature_dim(), n * p);
    std::vector<std::uint8_t> legal(static_cast<std::size_t>(n) * p * u);
    const std::vector<double> eps(static_cast<std::size_t>(n) * p, 0.0);
    int live = n;
    while (live > 0) {
      for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
          const int col = i * p + a;
          const auto slot = opts.sad ? train::sad_input(prev[i], a, opts.slot_source) : std::nullopt;
          enc.encode_into(states[i], a, slot, std::span<float>(obs.col(col).data(), enc.feature_dim()));
          enc.legal_mask_into(states[i], a, std::span<std::uint8_t>(legal.data() + col * u, u));
        }
      }
      auto acted = train::act(params, obs, legal, rstate, eps, unused);
      rstate = std::move(acted.state);
      for (int i = 0; i < n; ++i) {
        if (states[i].terminal()) continue;
        const int actor = states[i].current_player();
        const int col = i * p + actor;
        const int move = acted.env_action[col];
        states[i].apply_move_id(move);
        prev[i] = train::PreviousStep{actor, acted.greedy_action[col], move};
        if (opts.record_moves) moves[start + i].push_back(move);
        if (states[i].terminal()) {
          scores[start + i] = states[i].score();
          --live;
        }
      }
    }
  }
  auto r = summarize_scores(std::move(scores));
  r.moves = std::move(moves);
  return r;
}

EvalResult random_policy_baseline(int players, int games, std::uint64_t seed, int max_steps) {
  if (games <= 0) throw DomainError("evaluation needs at least one game");
  std::vector<int> scores(games);
  for (int g = 0; g < games; ++g) {
    auto state = hanabi::HanabiState::new_game(players, mix64(seed + static_cast<std::uint64_t>(g)), max_steps);
    RngStream rng(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(g));
    std::vector<int> options;
    while (!state.terminal()) {
      const auto mask = state.legal_moves();
      options.clear();
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) options.push_back(static_cast<int>(i));
      state.apply_move_id(options[rng.uniform_int(options.size())]);
    }
    scores[g] = state.score();
  }
  return summarize_scores(std::move(scores));
}

nn::Checkpoint make_checkpoint(const nn::NetworkParams<float>& params, const ActorConfig& cfg) {
  nn::Checkpoint ck;
  ck.params = params;
  ck.metadata["encoder_version"] = std::string(hanabi::kEncoderVersion);
  ck.metadata["players"] = std::to_string(cfg.players);
  ck.metadata["sad"] = cfg.sad ? "1" : "0";
  ck.metadata["aux"] = cfg.aux ? "1" : "0";
  ck.metadata["mode"] = cfg.mode == train::Mode::kVdn ? "vdn" : "iql";
  ck.metadata["gamma"] = std::to_string(cfg.gamma);
  ck.metadata["n_step"] = std::to_string(cfg.n_step);
  ck.metadata["max_steps"] = std::to_string(cfg.max_steps);
  return ck;
}

EvalResult evaluate_checkpoint(const std::filesystem::path& dir, int games, std::uint64_t seed) {
  if (games <= 0) throw DomainError("evaluation needs at least one game");
  const auto ck = nn::load_checkpoint(dir);
  const auto version = ck.metadata.find("encoder_version");
  if (version == ck.metadata.end() || version->second != hanabi::kEncoderVersion) {
    throw ConfigError("checkpoint encoder version '" + (version == ck.metadata.end() ? "" : version->second) +
                      "' does not match this build ('" + std::string(hanabi::kEncoderVersion) + "')");
  }
  auto get = [&](const char* key) {
    const auto it = ck.metadata.find(key);
    if (it == ck.metadata.end()) throw ParseError(std::string("checkpoint metadata lacks ") + key);
    return it->second;
  };
  EvalOptions opts;
  opts.players = std::stoi(get("players"));
  opts.sad = get("sad") == "1";
  opts.max_steps = std::stoi(get("max_steps"));
  return evaluate_policy(ck.params, opts, games, seed);
}

}  // namespace sad::harness
