#include "sad/tabular/tabular.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "sad/core/error.hpp"
#include "sad/core/stats.hpp"
#include "sad/matrix_game/game.hpp"

namespace sad::tabular {

namespace {
constexpr int kNoGreedy = kNumActions;  // NONE slot
}

int greedy_action(const QRow& row) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

TabularAgents::TabularAgents(bool sad)
    : sad_enabled(sad),
      p1(kNumCards),
      p2(sad ? kNumCards * kNumActions * (kNumActions + 1) : kNumCards * kNumActions) {}

P2Key TabularAgents::p2_key(int card, int env_action, int p1_greedy) const {
  P2Key key{card, env_action, std::nullopt};
  if (sad_enabled) key.greedy = p1_greedy;
  return key;
}

int TabularAgents::p2_index(const P2Key& key) const {
  if (sad_enabled != key.greedy.has_value()) throw DomainError("P2 key arity does not match table");
  const int base = key.card * kNumActions + key.env_action;
  if (!sad_enabled) return base;
  return base * (kNumActions + 1) + key.greedy.value_or(kNoGreedy);
}

void TabularConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(decay_fraction >= 0.0 && decay_fraction <= 1.0)) throw ConfigError("decay_fraction must lie in [0, 1]");
  if (episodes < 0) throw ConfigError("episodes must be non-negative");
  if (seeds < 1) throw ConfigError("seeds must be positive");
  if (eval_every < 1) throw ConfigError("eval_every must be positive");
}

double epsilon_at(const TabularConfig& cfg, long episode) {
  const double decay_len = cfg.decay_fraction * static_cast<double>(cfg.episodes);
  const double decay_start = static_cast<double>(cfg.episodes) - decay_len;
  if (decay_len <= 0.0 || episode < decay_start) return cfg.epsilon;
  const double remaining = (static_cast<double>(cfg.episodes) - episode) / decay_len;
  return cfg.epsilon * std::clamp(remaining, 0.0, 1.0);
}

EpisodeOutcome run_episode(TabularAgents& agents, const TabularConfig& cfg, double epsilon,
                           RngStream& rng) {
  matrix_game::MatrixGame game(cfg.payoff, rng);
  EpisodeOutcome out;
  out.c1 = game.state().c1;
  out.c2 = game.state().c2;

  auto explore = [&](int greedy) {
    if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_int(kNumActions));
    return greedy;
  };

  QRow& q1 = agents.p1.row(out.c1);
  out.p1_greedy = greedy_action(q1);
  out.a1 = explore(out.p1_greedy);
  game.step({out.a1, matrix_game::MatrixGame::kNoop});

  const int p2_card = game.observe(AgentId{1}).features[1] > 0.5f ? 1 : 0;
  out.p2_key = agents.p2_key(p2_card, *game.state().a1, out.p1_greedy);
  QRow& q2 = agents.p2.row(agents.p2_index(out.p2_key));
  out.a2 = explore(greedy_action(q2));
  out.reward = game.step({matrix_game::MatrixGame::kNoop, out.a2}).reward;

  q1[out.a1] += cfg.learning_rate * (out.reward - q1[out.a1]);
  q2[out.a2] += cfg.learning_rate * (out.reward - q2[out.a2]);
  return out;
}

double evaluate(const TabularAgents& agents, const matrix_game::PayoffTensor& payoff,
                GreedySlotSource source) {
  double total = 0.0;
  for (int c1 = 0; c1 < kNumCards; ++c1) {
    for (int c2 = 0; c2 < kNumCards; ++c2) {
      matrix_game::MatrixGame game(payoff, c1, c2);
      const int a1 = greedy_action(agents.p1.row(c1));
      game.step({a1, matrix_game::MatrixGame::kNoop});
      const auto obs = game.observe(AgentId{1});
      const int executed = *obs.last_action;
      const int slot = source == GreedySlotSource::kSideChannel ? a1 : executed;
      const auto key = agents.p2_key(c2, executed, slot);
      const int a2 = greedy_action(agents.p2.row(agents.p2_index(key)));
      total += game.step({matrix_game::MatrixGame::kNoop, a2}).reward;
    }
  }
  return total / (kNumCards * kNumCards);
}

TabularAgents train_seed(const TabularConfig& cfg, int seed_index, std::vector<CurveRow>* curve) {
  TabularAgents agents(cfg.sad_enabled);
  RngStream rng = RngStream(cfg.base_seed, 0).split(static_cast<std::uint64_t>(seed_index));
  for (long ep = 0; ep < cfg.episodes; ++ep) {
    if (curve && ep % cfg.eval_every == 0) {
      curve->push_back({seed_index, ep, evaluate(agents, cfg.payoff)});
    }
    run_episode(agents, cfg, epsilon_at(cfg, ep), rng);
  }
  if (curve) curve->push_back({seed_index, cfg.episodes, evaluate(agents, cfg.payoff)});
  return agents;
}

ExperimentResult experiment(const TabularConfig& cfg) {
  cfg.validate();
  if (cfg.seeds < 2) throw ConfigError("experiment needs at least two seeds");
  ExperimentResult result;
  result.per_seed.assign(cfg.seeds, 0.0);
  std::vector<std::vector<CurveRow>> curves(cfg.seeds);

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, cfg.seeds);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int s = t; s < cfg.seeds; s += threads) {
        const auto agents = train_seed(cfg, s, &curves[s]);
        result.per_seed[s] = evaluate(agents, cfg.payoff);
      }
    });
  }
  for (auto& th : pool) th.join();

  const auto stats = mean_sem(result.per_seed);
  result.mean = stats.mean;
  result.sem = stats.sem;
  for (auto& c : curves) result.curve.insert(result.curve.end(), c.begin(), c.end());
  return result;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "seed,episode,eval_return\n";
  for (const auto& r : rows) out << r.seed << ',' << r.episode << ',' << r.eval_return << '\n';
  return out.str();
}

}  // namespace sad::tabular
