#include "sad/harness/actor.hpp"

#include <cmath>

#include "sad/core/error.hpp"
#include "sad/replay/buffer.hpp"

namespace sad::harness {

std::vector<double> actor_epsilons(int n, double base, double alpha) {
  if (n < 1) throw ConfigError("actor count must be >= 1");
  if (n == 1) return {base};
  std::vector<double> eps(n);
  for (int i = 0; i < n; ++i) eps[i] = std::pow(base, 1.0 + alpha * i / (n - 1));
  return eps;
}

nn::NetworkShape network_shape(const ActorConfig& cfg, int hidden_dim, int lstm_layers) {
  const hanabi::ObservationEncoder enc(cfg.players, cfg.sad);
  nn::NetworkShape s;
  s.input_dim = enc.feature_dim();
  s.hidden_dim = hidden_dim;
  s.lstm_layers = lstm_layers;
  s.num_actions = enc.num_actions();
  s.hand_size = enc.hand_size();
  s.aux_head = cfg.aux;
  return s;
}

HanabiActor::HanabiActor(ActorConfig cfg, std::vector<double> epsilons, RngStream rng)
    : cfg_(cfg), encoder_(cfg.players, cfg.sad), epsilons_(std::move(epsilons)), rng_(rng) {
  if (epsilons_.empty()) throw ConfigError("actor needs at least one game");
  const int p = cfg_.players;
  const int cols = static_cast<int>(epsilons_.size()) * p;
  envs_.resize(epsilons_.size(), Game{hanabi::HanabiState::new_game(p, 0, cfg_.max_steps), {}, {}, {}, 0.0, 0});
  obs_ = nn::Matrix<float>::Zero(encoder_.feature_dim(), cols);
  legal_.assign(static_cast<std::size_t>(cols) * encoder_.num_actions(), 0);
  column_eps_.resize(cols);
  for (int k = 0; k < games(); ++k)
    for (int a = 0; a < p; ++a) column_eps_[k * p + a] = epsilons_[k];
  for (std::size_t k = 0; k < envs_.size(); ++k) reset(k);
}

void HanabiActor::reset(std::size_t k) {
  Game& g = envs_[k];
  g.state = hanabi::HanabiState::new_game(cfg_.players, rng_.next_u64(), cfg_.max_steps);
  g.record.resize(cfg_.players, encoder_.feature_dim(), encoder_.num_actions(), cfg_.aux ? encoder_.hand_size() : 0,
                  cfg_.max_steps);
  g.q = nn::Matrix<float>::Zero(encoder_.num_actions(), (cfg_.max_steps + 1) * cfg_.players);
  g.previous.reset();
  g.episode_return = 0.0;
  g.t = 0;
  if (state_ready_) {
    for (std::size_t l = 0; l < state_.hidden.size(); ++l) {
      state_.hidden[l].middleCols(static_cast<Eigen::Index>(k) * cfg_.players, cfg_.players).setZero();
      state_.cell[l].middleCols(static_cast<Eigen::Index>(k) * cfg_.players, cfg_.players).setZero();
    }
  }
}

void HanabiActor::write_observation(std::size_t k, int row) {
  Game& g = envs_[k];
  for (int a = 0; a < cfg_.players; ++a) {
    const auto slot = cfg_.sad ? train::sad_input(g.previous, a, cfg_.slot_source) : std::nullopt;
    auto dst = g.record.obs_at(row, a);
    encoder_.encode_into(g.state, a, slot, dst);
    encoder_.continuation_mask_into(g.state, a, g.record.legal_at(row, a));
  }
}

void HanabiActor::step(const nn::NetworkParams<float>& params, std::vector<FinishedEpisode>& out) {
  const int p = cfg_.players;
  const int u = encoder_.num_actions();
  if (!state_ready_) {
    state_ = nn::RecurrentState<float>::zeros(params.shape(), games() * p);
    state_ready_ = true;
  }
  for (std::size_t k = 0; k < envs_.size(); ++k) {
    Game& g = envs_[k];
    write_observation(k, g.t);
    for (int a = 0; a < p; ++a) {
      const auto col = static_cast<Eigen::Index>(k) * p + a;
      const auto src = g.record.obs_at(g.t, a);
      std::copy(src.begin(), src.end(), obs_.col(col).data());
      const auto lg = g.record.legal_at(g.t, a);
      std::copy(lg.begin(), lg.end(), legal_.begin() + col * u);
    }
  }
  auto acted = train::act(params, obs_, legal_, state_, column_eps_, rng_);
  state_ = std::move(acted.state);

  for (std::size_t k = 0; k < envs_.size(); ++k) {
    Game& g = envs_[k];
    const int actor = g.state.current_player();
    for (int a = 0; a < p; ++a) {
      const auto col = static_cast<Eigen::Index>(k) * p + a;
      const auto idx = g.record.step_index(g.t, a);
      g.record.action[idx] = static_cast<std::int16_t>(acted.env_action[col]);
      g.record.greedy[idx] = static_cast<std::int16_t>(acted.greedy_action[col]);
      g.record.acting[idx] = a == actor ? 1 : 0;
      g.q.col(g.t * p + a) = acted.q.col(col);
      if (cfg_.aux) {
        const auto targets = hanabi::aux_targets(g.state, a);
        for (std::size_t s = 0; s < targets.size(); ++s) {
          g.record.aux[idx * targets.size() + s] = static_cast<std::int8_t>(targets[s]);
        }
      }
    }
    const auto actor_col = static_cast<Eigen::Index>(k) * p + actor;
    const int move = acted.env_action[actor_col];
    const auto outcome = g.state.apply_move_id(move);
    g.record.reward[g.t] = static_cast<float>(outcome.reward);
    g.episode_return += outcome.reward;
    g.previous = train::PreviousStep{actor, acted.greedy_action[actor_col], move};
    ++g.t;
    ++env_steps_;
    if (outcome.done) {
      out.push_back(finish(k, params));
      ++episodes_;
      reset(k);
    }
  }
}

FinishedEpisode HanabiActor::finish(std::size_t k, const nn::NetworkParams<float>& params) {
  Game& g = envs_[k];
  const int p = cfg_.players;
  const int len = g.t;
  write_observation(k, len);
  auto& rec = g.record;
  rec.truncated = g.state.truncated();
  if (rec.truncated) {
    // Q at the cut, continuing this game's recurrent state.
    nn::RecurrentState<float> st;
    for (std::size_t l = 0; l < state_.hidden.size(); ++l) {
      st.hidden.push_back(state_.hidden[l].middleCols(static_cast<Eigen::Index>(k) * p, p));
      st.cell.push_back(state_.cell[l].middleCols(static_cast<Eigen::Index>(k) * p, p));
    }
    nn::Matrix<float> last(encoder_.feature_dim(), p);
    for (int a = 0; a < p; ++a) {
      const auto src = rec.obs_at(len, a);
      std::copy(src.begin(), src.end(), last.col(a).data());
    }
    g.q.middleCols(len * p, p) = nn::forward(params, last, 1, st).q;
  }
  // Drop the unused tail; every field is laid out step-major.
  const std::size_t steps = static_cast<std::size_t>(len) * p;
  const std::size_t rows = steps + p;
  rec.length = len;
  rec.obs.resize(rows * rec.obs_dim);
  rec.legal.resize(rows * rec.num_actions);
  rec.action.resize(steps);
  rec.greedy.resize(steps);
  rec.acting.resize(steps);
  rec.reward.resize(len);
  rec.aux.resize(steps * rec.aux_slots);
  const nn::Matrix<float> q = g.q.leftCols(static_cast<Eigen::Index>(rows));

  FinishedEpisode fin;
  fin.episode_return = g.episode_return;
  fin.score = g.state.score();
  fin.length = len;
  if (cfg_.mode == train::Mode::kVdn) {
    const auto td = train::actor_td_errors(rec, q, cfg_.mode, cfg_.gamma, cfg_.n_step);
    fin.priorities.push_back(replay::episode_priority(td, cfg_.eta));
    fin.records.push_back(std::move(rec));
    return fin;
  }
  for (int a = 0; a < p; ++a) {
    replay::EpisodeRecord own;
    own.resize(1, rec.obs_dim, rec.num_actions, rec.aux_slots, len);
    own.truncated = rec.truncated;
    own.reward = rec.reward;
    nn::Matrix<float> own_q(rec.num_actions, len + 1);
    for (int t = 0; t <= len; ++t) {
      const auto o = rec.obs_at(t, a);
      std::copy(o.begin(), o.end(), own.obs_at(t, 0).begin());
      const auto lg = rec.legal_at(t, a);
      std::copy(lg.begin(), lg.end(), own.legal_at(t, 0).begin());
      own_q.col(t) = q.col(t * p + a);
      if (t == len) continue;
      const auto src = rec.step_index(t, a);
      own.action[t] = rec.action[src];
      own.greedy[t] = rec.greedy[src];
      own.acting[t] = rec.acting[src];
      for (int s = 0; s < rec.aux_slots; ++s) own.aux[t * rec.aux_slots + s] = rec.aux[src * rec.aux_slots + s];
    }
    const auto td = train::actor_td_errors(own, own_q, cfg_.mode, cfg_.gamma, cfg_.n_step);
    fin.priorities.push_back(replay::episode_priority(td, cfg_.eta));
    fin.records.push_back(std::move(own));
  }
  return fin;
}

}  // namespace sad::harness
