// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sad/belief/belief.hpp"
#include "sad/core/error.hpp"
#include "sad/core/rng.hpp"
#include "sad/hanabi/encoder.hpp"
#include "sad/hanabi/env.hpp"
#include "sad/hanabi/state.hpp"
#include "sad/harness/runner.hpp"
#include "sad/matrix_game/solver.hpp"
#include "sad/nn/network.hpp"
#include "sad/replay/buffer.hpp"
#include "sad/tabular/tabular.hpp"
#include "sad/train/train.hpp"

using namespace sad;
using nn::Matrix;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome matrix_game_reproduction() {
  const auto t0 = Clock::now();
  tabular::TabularConfig cfg;
  cfg.seeds = 100;
  cfg.sad_enabled = true;
  const auto sad = tabular::experiment(cfg);
  cfg.sad_enabled = false;
  const auto iql = tabular::experiment(cfg);
  const double secs = seconds_since(t0);
  const bool pass = sad.mean >= 9.9 && sad.sem <= 0.05 && iql.mean < sad.mean && iql.mean >= 8.0;
  return {pass, fmt("sad %.4f +- %.4f, iql %.4f +- %.4f, %.1f s", sad.mean, sad.sem, iql.mean, iql.sem, secs)};
}

Outcome solver_oracle() {
  const auto t0 = Clock::now();
  const auto r = matrix_game::solve_exhaustive(matrix_game::default_payoff());
  const double secs = seconds_since(t0);
  const bool pass = r.best_value == 10.0 && r.best_noncomm_value == 8.0 && secs < 1.0;
  return {pass, fmt("(%g, %g, %ld optimal policies) in %.3f s", r.best_value, r.best_noncomm_value,
                    r.optimal_policy_count, secs)};
}

belief::BeliefDistribution random_prior(RngStream& rng, int n) {
  belief::BeliefDistribution b;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    b.support.push_back(i);
    b.probs.push_back(rng.uniform() + 1e-3);
    total += b.probs.back();
  }
  for (double& p : b.probs) p /= total;
  return b;
}

Outcome belief_equations() {
  using namespace belief;
  RngStream rng(31, 0);
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;
  int instances_b = 0;
  bool exceptions_agree = true;

  // (a) uniform exploration leaves the prior unchanged
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(7));
    const int actions = 2 + static_cast<int>(rng.uniform_int(4));
    const auto prior = random_prior(rng, n);
    std::vector<int> table(n);
    for (int& g : table) g = static_cast<int>(rng.uniform_int(actions));
    EpsGreedyPolicy policy{[&](int h) { return table[h]; }, 1.0, actions};
    for (int u = 0; u < actions; ++u) {
      const auto post = bayes_update(prior, policy, u);
      for (int i = 0; i < n; ++i) worst_a = std::max(worst_a, std::abs(post.probs[i] - prior.probs[i]));
    }
  }

  // (b) without exploration the Bayesian update is the greedy filter
  while (instances_b < 1000) {
    const int n = 2 + static_cast<int>(rng.uniform_int(9));
    const int actions = 2 + static_cast<int>(rng.uniform_int(4));
    const auto prior = random_prior(rng, n);
    std::vector<int> table(n);
    for (int& g : table) g = static_cast<int>(rng.uniform_int(actions));
    auto greedy = [&](int h) { return table[h]; };
    EpsGreedyPolicy policy{greedy, 0.0, actions};
    const int u = static_cast<int>(rng.uniform_int(actions));
    std::optional<BeliefDistribution> a, b;
    try {
      a = bayes_update(prior, policy, u);
    } catch (const ImpossibleEvidence&) {
    }
    try {
      b = sad_update(prior, greedy, u);
    } catch (const ImpossibleEvidence&) {
    }
    if (a.has_value() != b.has_value()) exceptions_agree = false;
    if (a && b) {
      for (int i = 0; i < n; ++i) worst_b = std::max(worst_b, std::abs(a->probs[i] - b->probs[i]));
    }
    ++instances_b;
  }

  // (c) two-card matrix game: condition the enumerated joint of card,
  // exploration coin and exploratory action
  for (int p1_policy = 0; p1_policy < 9; ++p1_policy) {
    const int greedy_of[2] = {p1_policy % 3, p1_policy / 3};
    for (double eps : {0.0, 0.05, 0.1, 0.37, 0.5, 0.9, 1.0}) {
      double joint[2][3] = {};
      for (int card = 0; card < 2; ++card) {
        joint[card][greedy_of[card]] += 0.5 * (1.0 - eps);
        for (int u = 0; u < 3; ++u) joint[card][u] += 0.5 * eps / 3.0;
      }
      for (int u = 0; u < 3; ++u) {
        const double evidence = joint[0][u] + joint[1][u];
        if (evidence == 0.0) continue;
        EpsGreedyPolicy policy{[&](int c) { return greedy_of[c]; }, eps, 3};
        const auto post = bayes_update(BeliefDistribution::uniform({0, 1}), policy, u);
        for (int card = 0; card < 2; ++card) {
          worst_c = std::max(worst_c, std::abs(post.prob(card) - joint[card][u] / evidence));
        }
      }
    }
  }
  const bool pass = worst_a <= 1e-12 && worst_b <= 1e-12 && exceptions_agree && worst_c <= 1e-12;
  return {pass, fmt("(a) max err %.2e, (b) %d instances max err %.2e, (c) max err %.2e", worst_a, instances_b,
                    worst_b, worst_c)};
}

Outcome hanabi_properties() {
  using namespace hanabi;
  const auto t0 = Clock::now();
  RngStream rng(4242, 0);
  long games = 0, failures = 0;
  std::string first_failure;
  for (int players = 2; players <= 5; ++players) {
    for (int g = 0; g < 10000; ++g) {
      ++games;
      GameReplay replay{players, rng.next_u64(), kDefaultMaxSteps, {}};
      auto s = HanabiState::new_game(players, replay.seed);
      double ret = 0.0;
      try {
        s.check_invariants();
        while (!s.terminal()) {
          const auto mask = s.legal_moves();
          std::vector<int> ids;
          for (int id = 0; id < static_cast<int>(mask.size()); ++id) {
            if (mask[id]) ids.push_back(id);
          }
          const int id = ids[rng.uniform_int(ids.size())];
          replay.moves.push_back(id);
          ret += s.apply_move_id(id).reward;
          s.check_invariants();
        }
        if (s.score() > 25) throw InvariantViolation("score above 25");
        if (ret != s.score()) throw InvariantViolation("return differs from final score");
        if (s.life_tokens() == 0 && s.score() != 0) throw InvariantViolation("bomb-out kept points");
        const auto again = run_replay(parse_replay(format_replay(replay)));
        if (again.episode_return != ret || again.state.fireworks() != s.fireworks() ||
            again.state.discards() != s.discards() || again.state.info_tokens() != s.info_tokens() ||
            again.state.life_tokens() != s.life_tokens()) {
          throw InvariantViolation("replay diverged");
        }
        ObservationEncoder enc(players, true);
        for (int p = 0; p < players; ++p) {
          if (enc.encode(again.state, p) != enc.encode(s, p)) throw InvariantViolation("replay observation differs");
        }
      } catch (const Error& e) {
        if (failures++ == 0) first_failure = fmt("%d players game %d: %s", players, g, e.what());
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = failures == 0 && secs < 120.0;
  auto detail = fmt("%ld games, %ld failures, %.1f s", games, failures, secs);
  if (failures) detail += "; first: " + first_failure;
  return {pass, detail};
}

double toy_loss(const nn::NetworkParams<double>& p, const Matrix<double>& obs, int steps,
                const nn::RecurrentState<double>& init, const Matrix<double>& cq, const Matrix<double>& ca) {
  auto out = nn::forward(p, obs, steps, init);
  return cq.cwiseProduct(out.q).sum() + ca.cwiseProduct(out.aux_logits).sum() + 0.5 * out.q.squaredNorm();
}

Outcome gradient_check() {
  nn::NetworkShape s;
  s.input_dim = 7;
  s.hidden_dim = 5;
  s.lstm_layers = 2;
  s.num_actions = 4;
  s.hand_size = 2;
  s.aux_head = true;
  RngStream rng(77, 0);
  const int steps = 4, batch = 2, cols = steps * batch;
  auto random = [&](int r, int c, double scale) {
    Matrix<double> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * (2.0 * rng.uniform() - 1.0);
    return m;
  };
  auto p = nn::NetworkParams<double>::init(s, rng);
  for (auto& t : p.tensors()) t.value *= 1.5;
  for (auto& t : p.tensors()) {
    if (t.value.cols() == 1) t.value = random(static_cast<int>(t.value.rows()), 1, 0.3);
  }
  const auto obs = random(s.input_dim, cols, 2.0);
  auto init = nn::RecurrentState<double>::zeros(s, batch);
  for (int l = 0; l < s.lstm_layers; ++l) {
    init.hidden[l] = random(s.hidden_dim, batch, 0.5);
    init.cell[l] = random(s.hidden_dim, batch, 0.5);
  }
  const auto cq = random(s.num_actions, cols, 1.0);
  const auto ca = random(s.aux_dim(), cols, 1.0);

  nn::ForwardCache<double> cache;
  const auto out = nn::forward(p, obs, steps, init, &cache);
  const Matrix<double> dq = cq + out.q;
  const auto g = nn::backward(p, cache, dq, ca);

  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_name;
  long checked = 0;
  for (std::size_t ti = 0; ti < p.tensors().size(); ++ti) {
    auto& value = p.tensors()[ti].value;
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double orig = value.data()[k];
      value.data()[k] = orig + h;
      const double up = toy_loss(p, obs, steps, init, cq, ca);
      value.data()[k] = orig - h;
      const double down = toy_loss(p, obs, steps, init, cq, ca);
      value.data()[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = g.tensors()[ti].value.data()[k];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      if (rel > worst) {
        worst = rel;
        worst_name = p.tensors()[ti].name;
      }
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("%ld parameters, max relative error %.2e (%s)", checked, worst, worst_name.c_str())};
}

Outcome replay_statistics() {
  replay::ReplayConfig cfg;
  cfg.capacity = 2;
  cfg.warmup = 1;
  cfg.priority_exponent = 0.9;
  replay::PrioritizedReplay buf(cfg);
  auto episode = [] {
    replay::EpisodeRecord e;
    e.resize(1, 2, 2, 0, 1);
    return e;
  };
  const auto low = buf.add(episode(), 1.0);
  buf.add(episode(), 2.0);
  RngStream rng(606, 0);
  const int draws = 100000;
  const auto batch = buf.sample(draws, rng);
  long n_low = 0;
  for (auto id : batch.ids) n_low += id == low;
  const double p_low = 1.0 / (1.0 + std::pow(2.0, 0.9));
  const double e_low = draws * p_low, e_high = draws - e_low;
  const double n_high = draws - static_cast<double>(n_low);
  const double chi2 = (n_low - e_low) * (n_low - e_low) / e_low + (n_high - e_high) * (n_high - e_high) / e_high;

  const std::vector<double> a{1.0, 3.0}, b{2.0}, c{0.0, 0.0, 4.0, 0.0};
  const double pa = replay::episode_priority(a, 0.9);
  const double pb = replay::episode_priority(b, 0.9);
  const double pc = replay::episode_priority(c, 0.9);
  const bool formula = std::abs(pa - 2.9) < 1e-12 && std::abs(pb - 2.0) < 1e-12 && std::abs(pc - 3.7) < 1e-12;
  return {chi2 < 6.635 && formula,
          fmt("chi2 %.3f (critical 6.635), low-priority share %.4f vs %.4f; [1,3] -> %.12g, [2] -> %.12g, "
              "[0,0,4,0] -> %.12g",
              chi2, static_cast<double>(n_low) / draws, p_low, pa, pb, pc)};
}

nn::NetworkParams<float> constant_q(float value, std::vector<float> adv) {
  nn::NetworkShape s;
  s.input_dim = 4;
  s.hidden_dim = 6;
  s.lstm_layers = 2;
  s.num_actions = 3;
  s.hand_size = 2;
  s.aux_head = false;
  nn::NetworkParams<float> p(s);
  p.value_b()(0, 0) = value;
  for (std::size_t i = 0; i < adv.size(); ++i) p.adv_b()(static_cast<Eigen::Index>(i), 0) = adv[i];
  return p;
}

replay::EpisodeRecord fixed_episode(int agents, std::vector<float> rewards) {
  replay::EpisodeRecord e;
  const int len = static_cast<int>(rewards.size());
  e.resize(agents, 4, 3, 0, len);
  e.reward = rewards;
  RngStream rng(9, 0);
  for (auto& v : e.obs) v = static_cast<float>(rng.uniform());
  std::fill(e.legal.begin(), e.legal.end(), 1);
  for (int t = 0; t < len; ++t) {
    for (int a = 0; a < agents; ++a) {
      const auto k = e.step_index(t, a);
      e.action[k] = e.greedy[k] = static_cast<std::int16_t>((t + a) % 3);
      e.acting[k] = 1;
    }
  }
  return e;
}

using EpList = std::vector<std::shared_ptr<const replay::EpisodeRecord>>;

Outcome target_computation() {
  using namespace train;
  const double g = 0.999;
  TrainConfig cfg;
  cfg.mode = Mode::kVdn;
  cfg.n_step = 3;
  cfg.gamma = g;
  // online Q = [-0.5, 2.5, -0.5] picks action 1; target Q = [2.5, -0.5, -0.5]
  const auto online = constant_q(0.5f, {0, 3, 0});
  const auto target = constant_q(0.5f, {4, 1, 1});
  auto ep = std::make_shared<const replay::EpisodeRecord>(fixed_episode(1, {1.0f, -2.0f, 0.25f, 3.0f, 0.5f}));
  const auto t = compute_targets(assemble_batch(EpList{ep}), online, target, cfg);
  const double y0 = 1.0 + g * -2.0 + g * g * 0.25 + g * g * g * -0.5;
  const double y2 = 0.25 + g * 3.0 + g * g * 0.5;
  const double err0 = std::abs(t.y[t.index(0, 0)] - y0);
  const double err2 = std::abs(t.y[t.index(2, 0)] - y2);

  // two agents with Q = [2, 3, 1] + c: joint Q of actions (0, 1) is 5 + 2c
  auto two = fixed_episode(2, {1.0f});
  two.action[two.step_index(0, 0)] = 0;
  two.action[two.step_index(0, 1)] = 1;
  const auto tb = assemble_batch(EpList{std::make_shared<const replay::EpisodeRecord>(two)});
  Matrix<float> q(3, tb.obs.cols());
  for (Eigen::Index c = 0; c < q.cols(); ++c) q.col(c) << 2.0f, 3.0f, 1.0f;
  const double joint = joint_q(tb, q, 0, 0);
  const double per_agent = q(0, 0) + q(1, 1);

  // joint bootstrap sums both agents' double-Q values
  auto boot = std::make_shared<const replay::EpisodeRecord>(fixed_episode(2, {1.0f, 0.0f, 0.0f}));
  TrainConfig one = cfg;
  one.n_step = 1;
  const auto tj = compute_targets(assemble_batch(EpList{boot}), online, target, one);
  const double joint_err = std::abs(tj.y[tj.index(0, 0)] - (1.0 + g * (-0.5 + -0.5)));

  const bool pass = err0 < 1e-12 && err2 < 1e-12 && joint == 5.0 && joint == per_agent && joint_err < 1e-12;
  return {pass, fmt("3-step target err %.1e, horizon-cut err %.1e, joint Q %g vs sum %g, joint bootstrap err %.1e",
                    err0, err2, joint, per_agent, joint_err)};
}

Outcome decentralization(const nn::NetworkParams<float>* trained) {
  harness::ActorConfig a;
  a.sad = true;
  RngStream rng(88, 0);
  const auto fresh = nn::NetworkParams<float>::init(harness::network_shape(a, 64, 2), rng);
  harness::EvalOptions opts;
  opts.sad = true;
  opts.record_moves = true;
  std::string detail;
  bool pass = true;
  auto compare = [&](const nn::NetworkParams<float>& p, const char* name) {
    opts.slot_source = train::SlotSource::kSideChannel;
    const auto side = harness::evaluate_policy(p, opts, 1000, 2024);
    opts.slot_source = train::SlotSource::kExecutedAction;
    const auto exec = harness::evaluate_policy(p, opts, 1000, 2024);
    long identical = 0, moves = 0;
    for (std::size_t gi = 0; gi < side.moves.size() && gi < exec.moves.size(); ++gi) {
      identical += side.moves[gi] == exec.moves[gi];
      moves += static_cast<long>(side.moves[gi].size());
    }
    const bool ok = side.moves.size() == 1000 && exec.moves.size() == 1000 && identical == 1000;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("%s: %ld/1000 games identical (%ld moves, mean score %.2f)", name, identical, moves, exec.mean);
  };
  compare(fresh, "initialized net");
  if (trained) compare(*trained, "trained net");
  return {pass, detail};
}

Outcome desk_training(std::optional<nn::NetworkParams<float>>& trained) {
  auto cfg = harness::RunnerConfig::desk_scale(2, train::Mode::kVdn);
  cfg.train.sad = true;
  cfg.eval_games = 1000;
  cfg.seed = 7;
  const auto baseline = harness::random_policy_baseline(2, 1000, 1, cfg.max_steps);
  cfg.stop_at_eval = baseline.mean + 1.0;
  std::cerr << "[9] training: N=" << cfg.actor_threads << " K=" << cfg.envs_per_thread << " hidden "
            << cfg.hidden_dim << ", budget " << cfg.time_budget_seconds << " s\n";
  const auto res = harness::run_training(cfg, [](const harness::LogRow& row) {
    if (row.eval_score) {
      std::cerr << "[9] update " << row.update << " env steps " << row.env_steps << " eval " << *row.eval_score
                << " at " << row.seconds << " s\n";
    }
  });
  trained = res.params;
  const double threshold = res.random_baseline.mean + 1.0;
  double best = -1.0;
  for (const auto& e : res.evals) best = std::max(best, e.mean);
  const bool pass = res.metrics.eval_mean >= threshold && res.losses_finite && res.counters_monotone;
  return {pass, fmt("final eval %.3f +- %.3f (best %.3f) vs random %.3f + 1, %ld updates, %ld env steps, "
                    "%.0f s, losses finite %s, counters monotone %s",
                    res.metrics.eval_mean, res.metrics.eval_sem, best, res.random_baseline.mean,
                    res.metrics.updates, res.metrics.env_steps, res.metrics.seconds,
                    res.losses_finite ? "yes" : "no", res.counters_monotone ? "yes" : "no")};
}

Outcome throughput() {
  harness::ActorConfig a;
  a.sad = true;
  std::string detail;
  double headline = 0.0;
  for (int hidden : {512, 64}) {
    RngStream rng(5, 0);
    const auto p = nn::NetworkParams<float>::init(harness::network_shape(a, hidden, 2), rng);
    const auto one = harness::measure_throughput(a, p, 1, 5.0, 1);
    const auto sixteen = harness::measure_throughput(a, p, 16, 5.0, 1);
    const double ratio = sixteen.steps_per_sec / one.steps_per_sec;
    if (hidden == 512) headline = ratio;
    if (!detail.empty()) detail += "; ";
    detail += fmt("%d units: K=1 %.0f steps/s, K=16 %.0f steps/s, ratio %.2f", hidden, one.steps_per_sec,
                  sixteen.steps_per_sec, ratio);
  }
  detail += fmt(" (%u hardware threads)", std::thread::hardware_concurrency());
  return {headline >= 4.0, detail};
}

}  // namespace

int main() {
  std::map<int, Outcome> results;
  auto run = [&](int id, const std::function<Outcome()>& f) {
    const auto t0 = Clock::now();
    try {
      results[id] = f();
    } catch (const std::exception& e) {
      results[id] = Outcome{false, std::string("exception: ") + e.what()};
    }
    std::cerr << "[" << id << "] done in " << seconds_since(t0) << " s\n";
  };
  std::optional<nn::NetworkParams<float>> trained;
  run(1, matrix_game_reproduction);
  run(2, solver_oracle);
  run(3, belief_equations);
  run(4, hanabi_properties);
  run(5, gradient_check);
  run(6, replay_statistics);
  run(7, target_computation);
  run(9, [&] { return desk_training(trained); });
  run(8, [&] { return decentralization(trained ? &*trained : nullptr); });
  run(10, throughput);

  int failed = 0;
  for (const auto& [id, r] : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << r.detail << "\n";
    failed += !r.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << results.size() - failed << "/" << results.size() << "\n";
  return failed ? 1 : 0;
}
