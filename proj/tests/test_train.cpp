#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "sad/core/error.hpp"
#include "sad/train/train.hpp"

using namespace sad;
using namespace sad::train;
using replay::EpisodeRecord;
using EpPtr = std::shared_ptr<const EpisodeRecord>;

namespace {

constexpr double kGamma = 0.999;

nn::NetworkShape shape(int input = 4, int actions = 3, bool aux = false, int hand = 2) {
  nn::NetworkShape s;
  s.input_dim = input;
  s.hidden_dim = 6;
  s.lstm_layers = 2;
  s.num_actions = actions;
  s.hand_size = hand;
  s.aux_head = aux;
  return s;
}

// Network whose Q is the same constant vector for every input: only the
// value and advantage biases are nonzero.
NetworkParams<float> constant_q(float value, std::vector<float> adv) {
  NetworkParams<float> p(shape());
  p.value_b()(0, 0) = value;
  for (std::size_t i = 0; i < adv.size(); ++i) p.adv_b()(static_cast<Eigen::Index>(i), 0) = adv[i];
  return p;
}

EpisodeRecord make_episode(int agents, std::vector<float> rewards, bool truncated, RngStream& rng,
                           int aux_slots = 0) {
  EpisodeRecord e;
  const int len = static_cast<int>(rewards.size());
  e.resize(agents, 4, 3, aux_slots, len);
  e.truncated = truncated;
  e.reward = rewards;
  for (auto& v : e.obs) v = static_cast<float>(rng.uniform());
  std::fill(e.legal.begin(), e.legal.end(), 1);
  for (int t = 0; t < len; ++t) {
    for (int a = 0; a < agents; ++a) {
      const auto k = e.step_index(t, a);
      e.action[k] = static_cast<std::int16_t>(rng.uniform_int(3));
      e.greedy[k] = e.action[k];
      e.acting[k] = 1;
      for (int s = 0; s < aux_slots; ++s) e.aux[k * aux_slots + s] = static_cast<std::int8_t>(rng.uniform_int(3));
    }
  }
  return e;
}

// Independent-mode record in which the agent acts only at the listed steps;
// the pass action (2) is the only legal move elsewhere.
EpisodeRecord iql_episode(std::vector<float> rewards, std::vector<int> acting_steps, bool truncated,
                          bool acting_at_end) {
  RngStream rng(3, 0);
  EpisodeRecord e = make_episode(1, rewards, truncated, rng);
  const int len = e.length;
  for (int t = 0; t <= len; ++t) {
    const bool acts = t < len ? std::find(acting_steps.begin(), acting_steps.end(), t) != acting_steps.end()
                              : acting_at_end;
    auto lg = e.legal_at(t, 0);
    lg[0] = lg[1] = acts ? 1 : 0;
    lg[2] = 1;
    if (t < len) {
      e.acting[t] = acts ? 1 : 0;
      e.action[t] = e.greedy[t] = static_cast<std::int16_t>(acts ? 0 : 2);
    }
  }
  return e;
}

std::vector<EpPtr> wrap(std::vector<EpisodeRecord> eps) {
  std::vector<EpPtr> out;
  for (auto& e : eps) out.push_back(std::make_shared<const EpisodeRecord>(std::move(e)));
  return out;
}

TrainConfig config(Mode mode, int n = 3) {
  TrainConfig c;
  c.mode = mode;
  c.n_step = n;
  c.gamma = kGamma;
  return c;
}

}  // namespace

TEST_CASE("masked argmax") {
  const std::vector<float> q{5, 9, 1};
  const std::vector<std::uint8_t> legal{1, 0, 1};
  CHECK(masked_argmax(q, legal) == 0);
  const std::vector<float> tie{2, 7, 7};
  const std::vector<std::uint8_t> all{1, 1, 1};
  CHECK(masked_argmax(tie, all) == 1);
  const std::vector<std::uint8_t> none{0, 0, 0};
  CHECK_THROWS_AS(masked_argmax(q, none), DomainError);
}

TEST_CASE("act: epsilon behaviour, masking and pass-only agents") {
  auto p = constant_q(0.0f, {1.0f, 4.0f, 2.0f});
  RngStream rng(1, 0);
  Matrix<float> obs = Matrix<float>::Random(4, 3);
  const std::vector<std::uint8_t> legal{1, 1, 0, /**/ 1, 0, 1, /**/ 0, 0, 1};
  const auto init = RecurrentState<float>::zeros(p.shape(), 3);

  const std::vector<double> greedy_eps{0.0, 0.0, 0.0};
  auto g = act(p, obs, legal, init, greedy_eps, rng);
  CHECK(g.greedy_action == std::vector<int>{1, 2, 2});
  CHECK(g.env_action == g.greedy_action);

  const std::vector<double> random_eps{1.0, 1.0, 1.0};
  std::map<int, int> counts;
  for (int i = 0; i < 20000; ++i) {
    auto r = act(p, obs, legal, init, random_eps, rng);
    CHECK(r.greedy_action[0] == 1);
    REQUIRE(r.env_action[0] != 2);
    REQUIRE(r.env_action[2] == 2);
    counts[r.env_action[0]]++;
  }
  CHECK(std::abs(counts[0] - 10000) < 400);

  // The hidden state advances for every column, including the pass-only one.
  NetworkParams<float> q(shape());
  RngStream init_rng(2, 0);
  q = NetworkParams<float>::init(shape(), init_rng);
  auto step = act(q, obs, legal, init, greedy_eps, rng);
  CHECK(step.state.hidden[0].col(2).cwiseAbs().maxCoeff() > 0.0f);
  const std::vector<std::uint8_t> bad{0, 0, 0, 1, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(act(q, obs, bad, init, greedy_eps, rng), DomainError);
}

TEST_CASE("greedy-action slot wiring") {
  CHECK_FALSE(sad_input(std::nullopt, 1, SlotSource::kSideChannel).has_value());
  const PreviousStep explore{0, 7, 3};  // greedy 7, executed 3
  CHECK(sad_input(explore, 1, SlotSource::kSideChannel) == 7);
  CHECK(sad_input(explore, 1, SlotSource::kExecutedAction) == 3);
  CHECK_FALSE(sad_input(explore, 0, SlotSource::kSideChannel).has_value());
  const PreviousStep greedy{1, 4, 4};
  CHECK(sad_input(greedy, 0, SlotSource::kSideChannel) == sad_input(greedy, 0, SlotSource::kExecutedAction));
}

TEST_CASE("terminal step with n = 1 gives the reward") {
  RngStream rng(1, 0);
  auto eps = wrap({make_episode(1, {0.5f, 2.0f}, false, rng)});
  auto tb = assemble_batch(eps);
  auto p = constant_q(1.0f, {0, 3, 0});
  auto t = compute_targets(tb, p, p, config(Mode::kVdn, 1));
  CHECK(t.y[t.index(1, 0)] == 2.0);
  CHECK(t.y[t.index(0, 0)] == doctest::Approx(0.5 + kGamma * 3.0).epsilon(1e-12));
}

TEST_CASE("hand-computed 3-step double-Q target") {
  // online Q = 0.5 + [-1, 2, -1] -> greedy action 1
  // target Q = 0.5 + [2, -1, -1]  -> its own argmax would be action 0
  auto online = constant_q(0.5f, {0, 3, 0});
  auto target = constant_q(0.5f, {4, 1, 1});
  RngStream rng(4, 0);
  auto eps = wrap({make_episode(1, {1.0f, -2.0f, 0.25f, 3.0f, 0.5f}, false, rng)});
  auto tb = assemble_batch(eps);
  auto t = compute_targets(tb, online, target, config(Mode::kVdn, 3));
  const double g = kGamma;
  CHECK(t.y[t.index(0, 0)] == doctest::Approx(1.0 + g * -2.0 + g * g * 0.25 + g * g * g * -0.5).epsilon(1e-12));
  CHECK(t.y[t.index(1, 0)] == doctest::Approx(-2.0 + g * 0.25 + g * g * 3.0 + g * g * g * -0.5).epsilon(1e-12));
  // Horizon shortens near the end; no bootstrap past a terminal state.
  CHECK(t.y[t.index(2, 0)] == doctest::Approx(0.25 + g * 3.0 + g * g * 0.5).epsilon(1e-12));
  CHECK(t.y[t.index(4, 0)] == doctest::Approx(0.5).epsilon(1e-12));

  // Evaluating with the target network's own argmax would give 2.5 instead.
  const double coupled = 1.0 + g * -2.0 + g * g * 0.25 + g * g * g * 2.5;
  CHECK(std::abs(t.y[t.index(0, 0)] - coupled) > 1.0);

  // Masking the online argmax moves the choice to the best legal action.
  EpisodeRecord masked = *eps[0];
  masked.legal_at(3, 0)[1] = 0;
  masked.action[3] = 0;
  auto tb2 = assemble_batch(wrap({masked}));
  auto t2 = compute_targets(tb2, online, target, config(Mode::kVdn, 3));
  // online legal {0, 2} tie at -0.5 -> action 0 -> target 2.5
  CHECK(t2.y[t2.index(0, 0)] == doctest::Approx(coupled).epsilon(1e-12));
}

TEST_CASE("truncated episodes bootstrap through the cut") {
  auto online = constant_q(0.5f, {0, 3, 0});
  auto target = constant_q(0.5f, {4, 1, 1});
  RngStream rng(5, 0);
  auto cut = wrap({make_episode(1, {1.0f, 2.0f}, true, rng)});
  auto t = compute_targets(assemble_batch(cut), online, target, config(Mode::kVdn, 3));
  CHECK(t.y[t.index(0, 0)] == doctest::Approx(1.0 + kGamma * 2.0 + kGamma * kGamma * -0.5).epsilon(1e-12));
  auto done = wrap({make_episode(1, {1.0f, 2.0f}, false, rng)});
  auto t2 = compute_targets(assemble_batch(done), online, target, config(Mode::kVdn, 3));
  CHECK(t2.y[t2.index(0, 0)] == doctest::Approx(1.0 + kGamma * 2.0).epsilon(1e-12));
}

TEST_CASE("joint Q is the per-agent sum") {
  auto p = constant_q(0.0f, {2.0f, 3.0f, 1.0f});  // Q = [0, 1, -1] + 2 = [2, 3, 1] after mean shift
  RngStream rng(6, 0);
  EpisodeRecord e = make_episode(2, {1.0f}, false, rng);
  e.action[e.step_index(0, 0)] = 0;
  e.action[e.step_index(0, 1)] = 1;
  auto tb = assemble_batch(wrap({e}));
  Matrix<float> q = nn::forward(p, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(p.shape(), 2)).q;
  q.array() += 2.0f;
  CHECK(q(0, 0) == 2.0f);
  CHECK(q(1, 1) == 3.0f);
  CHECK(joint_q(tb, q, 0, 0) == 5.0);
}

TEST_CASE("joint bootstrap sums every agent's double-Q value") {
  auto online = constant_q(0.5f, {0, 3, 0});
  auto target = constant_q(0.5f, {4, 1, 1});
  RngStream rng(7, 0);
  auto eps = wrap({make_episode(2, {1.0f, 0.0f, 0.0f}, false, rng)});
  auto t = compute_targets(assemble_batch(eps), online, target, config(Mode::kVdn, 1));
  CHECK(t.y[t.index(0, 0)] == doctest::Approx(1.0 + kGamma * (-0.5 - 0.5)).epsilon(1e-12));
}

TEST_CASE("independent mode: acting steps only, bootstrap at next acting step") {
  auto online = constant_q(0.5f, {0, 3, 0});
  auto target = constant_q(0.5f, {4, 1, 1});
  // acts at 0, 2, 4; n = 3 -> step 0 bootstraps at step 4
  auto e = iql_episode({1.0f, 2.0f, 3.0f, 4.0f, 5.0f}, {0, 2, 4}, false, false);
  auto tb = assemble_batch(wrap({e}));
  auto t = compute_targets(tb, online, target, config(Mode::kIql, 3));
  const double g = kGamma;
  // online legal at step 4: {0, 1, 2} -> greedy 1 -> target -0.5
  CHECK(t.y[t.index(0, 0)] == doctest::Approx(1 + g * 2 + g * g * 3 + g * g * g * 4 + g * g * g * g * -0.5).epsilon(1e-12));
  CHECK(t.y[t.index(2, 0)] == doctest::Approx(3 + g * 4 + g * g * 5).epsilon(1e-12));
  CHECK(t.valid == std::vector<std::uint8_t>{1, 0, 1, 0, 1});

  // Pass-only steps contribute no TD error.
  const std::vector<double> w{1.0};
  auto loss = compute_loss(tb, online, t, w, config(Mode::kIql, 3));
  CHECK(loss.td_errors[0].size() == 3);

  // Truncated with the agent to move at the cut: bootstrap there.
  auto cut = iql_episode({1.0f, 2.0f, 3.0f}, {0, 2}, true, false);
  auto tc = compute_targets(assemble_batch(wrap({cut})), online, target, config(Mode::kIql, 3));
  CHECK(tc.y[tc.index(2, 0)] == doctest::Approx(3.0).epsilon(1e-12));
  auto cut2 = iql_episode({1.0f, 2.0f, 3.0f}, {0, 2}, true, true);
  auto tc2 = compute_targets(assemble_batch(wrap({cut2})), online, target, config(Mode::kIql, 3));
  CHECK(tc2.y[tc2.index(2, 0)] == doctest::Approx(3.0 + g * -0.5).epsilon(1e-12));
  CHECK(tc2.y[tc2.index(0, 0)] == doctest::Approx(1 + g * 2 + g * g * 3 + g * g * g * -0.5).epsilon(1e-12));
}

TEST_CASE("loss edge cases") {
  RngStream rng(8, 0);
  auto eps = wrap({make_episode(2, {1.0f, -1.0f, 2.0f}, false, rng, 2), make_episode(2, {0.5f}, true, rng, 2)});
  auto tb = assemble_batch(eps);
  auto s = shape(4, 3, true, 2);
  auto p = NetworkParams<float>::init(s, rng);
  auto cfg = config(Mode::kVdn, 3);
  cfg.aux = true;
  auto targets = compute_targets(tb, p, p, cfg);

  const std::vector<double> zero{0.0, 0.0};
  CHECK(compute_loss(tb, p, targets, zero, cfg).td_loss == 0.0);

  // Targets equal to the current joint Q -> zero TD loss.
  const auto out = nn::forward(p, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(s, 4));
  Targets perfect = targets;
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < tb.length[b]; ++t) perfect.y[perfect.index(t, b)] = joint_q(tb, out.q, t, b);
  const std::vector<double> ones{1.0, 1.0};
  CHECK(compute_loss(tb, out.q, out.aux_logits, perfect, ones, cfg).td_loss == 0.0);

  // Uniform aux logits -> ln 3 per card.
  Matrix<float> uniform = Matrix<float>::Zero(out.aux_logits.rows(), out.aux_logits.cols());
  CHECK(compute_loss(tb, out.q, uniform, perfect, ones, cfg).aux_loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  // Logits pinned on the labels -> aux loss vanishes.
  Matrix<float> pinned = Matrix<float>::Constant(uniform.rows(), uniform.cols(), -50.0f);
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < tb.length[b]; ++t)
      for (int a = 0; a < 2; ++a)
        for (int h = 0; h < 2; ++h) pinned(3 * h + tb.aux[tb.sa(t, b, a) * 2 + h], tb.column(t, b, a)) = 50.0f;
  CHECK(compute_loss(tb, out.q, pinned, perfect, ones, cfg).aux_loss < 1e-6);

  auto bad = out.q;
  bad.col(0).setConstant(std::numeric_limits<float>::infinity());
  CHECK_THROWS_AS(compute_loss(tb, bad, out.aux_logits, targets, ones, cfg), NumericError);
}

TEST_CASE("loss gradients match finite differences") {
  RngStream rng(9, 0);
  auto eps = wrap({make_episode(2, {1.0f, -1.0f, 2.0f}, false, rng, 2), make_episode(2, {0.5f, 1.0f}, true, rng, 2)});
  auto tb = assemble_batch(eps);
  auto s = shape(4, 3, true, 2);
  auto p = NetworkParams<float>::init(s, rng);
  auto cfg = config(Mode::kVdn, 2);
  cfg.aux = true;
  cfg.aux_weight = 0.7;
  const auto targets = compute_targets(tb, p, p, cfg);
  const auto out = nn::forward(p, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(s, 4));
  const std::vector<double> w{0.6, 1.0};
  Matrix<float> dq, daux;
  compute_loss(tb, out.q, out.aux_logits, targets, w, cfg, &dq, &daux);
  const float h = 1e-2f;
  for (Eigen::Index i = 0; i < out.q.size(); ++i) {
    Matrix<float> up = out.q, down = out.q;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double num = (compute_loss(tb, up, out.aux_logits, targets, w, cfg).total -
                        compute_loss(tb, down, out.aux_logits, targets, w, cfg).total) / (2 * h);
    CHECK(dq.data()[i] == doctest::Approx(num).epsilon(2e-3).scale(1.0));
  }
  for (Eigen::Index i = 0; i < out.aux_logits.size(); ++i) {
    Matrix<float> up = out.aux_logits, down = out.aux_logits;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double num = (compute_loss(tb, out.q, up, targets, w, cfg).total -
                        compute_loss(tb, out.q, down, targets, w, cfg).total) / (2 * h);
    CHECK(daux.data()[i] == doctest::Approx(num).epsilon(2e-3).scale(1.0));
  }
}

TEST_CASE("actor-side TD errors match the trainer's on the same snapshot") {
  RngStream rng(10, 0);
  auto e = make_episode(2, {1.0f, 0.0f, -1.0f, 2.0f}, true, rng);
  auto p = NetworkParams<float>::init(shape(), rng);
  auto tb = assemble_batch(wrap({e}));
  const auto q = nn::forward(p, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(p.shape(), 2)).q;
  const auto from_actor = actor_td_errors(e, q, Mode::kVdn, kGamma, 3);
  auto cfg = config(Mode::kVdn, 3);
  const std::vector<double> w{1.0};
  const auto loss = compute_loss(tb, p, compute_targets(tb, p, p, cfg), w, cfg);
  REQUIRE(from_actor.size() == loss.td_errors[0].size());
  for (std::size_t i = 0; i < from_actor.size(); ++i) CHECK(from_actor[i] == doctest::Approx(loss.td_errors[0][i]));
}

TEST_CASE("trainer reduces loss on a fixed batch and is deterministic") {
  auto run = [] {
    RngStream rng(11, 0);
    auto eps = wrap({make_episode(2, {1.0f, 0.0f, 1.0f}, false, rng, 2), make_episode(2, {0.0f, 2.0f}, false, rng, 2)});
    auto cfg = config(Mode::kVdn, 3);
    cfg.aux = true;
    cfg.adam.lr = 1e-2;
    cfg.target_sync_every = 5;
    Trainer trainer(NetworkParams<float>::init(shape(4, 3, true, 2), rng), cfg);
    const std::vector<double> w{1.0, 1.0};
    std::vector<double> losses;
    for (int i = 0; i < 60; ++i) {
      auto r = trainer.update_on(eps, w);
      losses.push_back(r.td_loss + r.aux_loss);
    }
    return losses;
  };
  const auto a = run();
  const auto b = run();
  CHECK(a == b);
  CHECK(a.back() < 0.5 * a.front());
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.gamma == 0.999);
  CHECK(c.target_sync_every == 2500);
  CHECK(c.actor_sync_every == 10);
  c.n_step = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.gamma = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
