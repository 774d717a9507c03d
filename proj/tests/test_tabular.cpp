#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sad/tabular/tabular.hpp"

using namespace sad;
using namespace sad::tabular;

namespace {

// P1 signals its card with action 0 / 2; P2 answers 0 when the signal
// matches its own card and 2 otherwise.
void set_communicative(TabularAgents& agents) {
  agents.p1.row(0) = {1.0, 0.0, 0.0};
  agents.p1.row(1) = {0.0, 0.0, 1.0};
  for (int card = 0; card < 2; ++card) {
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int g = 0; g < 3; ++g) {
        const int p1_card = a1 == 0 ? 0 : 1;
        QRow row{0, 0, 0};
        row[p1_card == card ? 0 : 2] = 1.0;
        if (!agents.sad_enabled && g > 0) continue;
        agents.p2.row(agents.p2_index(agents.p2_key(card, a1, g))) = row;
      }
    }
  }
}

void set_always_safe(TabularAgents& agents) {
  for (int k = 0; k < agents.p1.size(); ++k) agents.p1.row(k) = {0.0, 1.0, 0.0};
  for (int k = 0; k < agents.p2.size(); ++k) agents.p2.row(k) = {0.0, 1.0, 0.0};
}

}  // namespace

TEST_CASE("greedy tie-break picks lowest id") {
  CHECK(greedy_action({0, 0, 0}) == 0);
  CHECK(greedy_action({1, 3, 3}) == 1);
  CHECK(greedy_action({-1, -2, 0}) == 2);
}

TEST_CASE("preset policies") {
  TabularConfig cfg;
  for (bool sad : {false, true}) {
    TabularAgents agents(sad);
    set_communicative(agents);
    CHECK(evaluate(agents, cfg.payoff) == 10.0);
    RngStream rng(1, 0);
    TabularConfig frozen = cfg;
    frozen.learning_rate = 1e-300;  // keeps the preset greedy choices
    for (int i = 0; i < 20; ++i) CHECK(run_episode(agents, frozen, 0.0, rng).reward == 10.0);

    TabularAgents safe(sad);
    set_always_safe(safe);
    CHECK(evaluate(safe, cfg.payoff) == 8.0);
    for (int i = 0; i < 20; ++i) CHECK(run_episode(safe, frozen, 0.0, rng).reward == 8.0);
  }
}

TEST_CASE("zero tables evaluate by enumeration") {
  // Oracle: all-zero tables pick action 0 everywhere, so the value is the
  // card-average of payoff[c1][c2][0][0].
  TabularConfig cfg;
  TabularAgents agents(true);
  double expected = 0.0;
  for (int c1 = 0; c1 < 2; ++c1) {
    for (int c2 = 0; c2 < 2; ++c2) expected += cfg.payoff.at(c1, c2, 0, 0);
  }
  CHECK(evaluate(agents, cfg.payoff) == expected / 4.0);
  CHECK(expected / 4.0 == 5.0);
}

TEST_CASE("ablation changes P2 key arity") {
  TabularAgents with(true), without(false);
  CHECK(with.p2_key(0, 1, 2).arity() == 3);
  CHECK(without.p2_key(0, 1, 2).arity() == 2);
  CHECK(with.p2.size() == 24);
  CHECK(without.p2.size() == 6);
  RngStream rng(1, 0);
  TabularConfig cfg;
  cfg.sad_enabled = false;
  for (int i = 0; i < 50; ++i) CHECK(!run_episode(without, cfg, 0.5, rng).p2_key.greedy);
}

TEST_CASE("sad channel carries the greedy action during exploration") {
  TabularAgents agents(true);
  agents.p1.row(0) = {0, 0, 1};
  agents.p1.row(1) = {0, 0, 1};
  TabularConfig cfg;
  RngStream rng(7, 0);
  bool saw_exploration = false;
  for (int i = 0; i < 200; ++i) {
    const auto out = run_episode(agents, cfg, 1.0, rng);
    CHECK(*out.p2_key.greedy == out.p1_greedy);
    saw_exploration |= out.a1 != out.p1_greedy;
  }
  CHECK(saw_exploration);
}

TEST_CASE("q update reaches its fixed point") {
  TabularConfig cfg;
  cfg.learning_rate = 0.5;
  TabularAgents agents(true);
  set_communicative(agents);
  RngStream rng(3, 0);
  for (int i = 0; i < 400; ++i) run_episode(agents, cfg, 0.0, rng);
  CHECK(std::abs(agents.p1.row(0)[0] - 10.0) < 1e-9);
  CHECK(std::abs(agents.p1.row(1)[2] - 10.0) < 1e-9);
}

TEST_CASE("rewards observed in training come from the payoff tensor") {
  TabularConfig cfg;
  std::set<double> entries(cfg.payoff.raw().begin(), cfg.payoff.raw().end());
  TabularAgents agents(true);
  RngStream rng(9, 0);
  for (int i = 0; i < 5000; ++i) CHECK(entries.count(run_episode(agents, cfg, 0.3, rng).reward) == 1);
}

TEST_CASE("side channel and executed action give identical evaluation") {
  TabularConfig cfg;
  cfg.episodes = 3000;
  for (int seed = 0; seed < 10; ++seed) {
    const auto agents = train_seed(cfg, seed, nullptr);
    CHECK(evaluate(agents, cfg.payoff, GreedySlotSource::kSideChannel) ==
          evaluate(agents, cfg.payoff, GreedySlotSource::kExecutedAction));
  }
}

TEST_CASE("experiment with zero episodes evaluates initial tables") {
  TabularConfig cfg;
  cfg.episodes = 0;
  cfg.seeds = 2;
  const auto r = experiment(cfg);
  CHECK(r.mean == 5.0);
  CHECK(r.sem == 0.0);
  CHECK(r.per_seed.size() == 2);
  CHECK(curve_csv(r.curve).rfind("seed,episode,eval_return\n", 0) == 0);
}

TEST_CASE("epsilon schedule") {
  TabularConfig cfg;
  cfg.episodes = 1000;
  CHECK(epsilon_at(cfg, 0) == 0.1);
  CHECK(epsilon_at(cfg, 899) == 0.1);
  CHECK(epsilon_at(cfg, 950) == doctest::Approx(0.05));
  CHECK(epsilon_at(cfg, 1000) == 0.0);
}
