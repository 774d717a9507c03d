#include "sad/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sad/core/error.hpp"

namespace sad::train {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (n_step < 1) throw ConfigError("n_step must be >= 1");
  if (target_sync_every < 1 || actor_sync_every < 1) throw ConfigError("sync intervals must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (aux_weight < 0.0) throw ConfigError("aux_weight must be >= 0");
  if (adam.lr < 0.0 || adam.eps <= 0.0) throw ConfigError("invalid optimizer settings");
}

int masked_argmax(std::span<const float> q, std::span<const std::uint8_t> legal) {
  if (q.size() != legal.size()) throw ShapeError("masked_argmax: size mismatch");
  int best = -1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (legal[i] && (best < 0 || q[i] > q[static_cast<std::size_t>(best)])) best = static_cast<int>(i);
  }
  if (best < 0) throw DomainError("masked_argmax: no legal action");
  return best;
}

ActOutput act(const NetworkParams<float>& params, const Matrix<float>& obs, std::span<const std::uint8_t> legal,
              const RecurrentState<float>& state, std::span<const double> epsilon, RngStream& rng) {
  const int u = params.shape().num_actions;
  const auto batch = static_cast<std::size_t>(obs.cols());
  if (legal.size() != batch * u || epsilon.size() != batch) throw ShapeError("act: batch size mismatch");
  auto out = nn::forward(params, obs, 1, state);
  ActOutput result;
  result.env_action.resize(batch);
  result.greedy_action.resize(batch);
  std::vector<int> options;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto mask = legal.subspan(b * u, u);
    const std::span<const float> qb(out.q.data() + b * u, u);
    const int greedy = masked_argmax(qb, mask);
    options.clear();
    for (int i = 0; i < u; ++i)
      if (mask[i]) options.push_back(i);
    int chosen = greedy;
    if (options.size() > 1 && rng.uniform() < epsilon[b]) chosen = options[rng.uniform_int(options.size())];
    result.greedy_action[b] = greedy;
    result.env_action[b] = chosen;
  }
  result.q = std::move(out.q);
  result.state = std::move(out.final_state);
  return result;
}

std::optional<int> sad_input(std::optional<PreviousStep> previous, int observer, SlotSource source) {
  if (!previous || previous->actor == observer) return std::nullopt;
  return source == SlotSource::kSideChannel ? previous->greedy_action : previous->executed_action;
}

TrainBatch assemble_batch(std::span<const std::shared_ptr<const replay::EpisodeRecord>> episodes) {
  if (episodes.empty()) throw ShapeError("assemble_batch: empty batch");
  const auto& first = *episodes.front();
  TrainBatch tb;
  tb.batch = static_cast<int>(episodes.size());
  tb.agents = first.num_agents;
  tb.obs_dim = first.obs_dim;
  tb.num_actions = first.num_actions;
  tb.aux_slots = first.aux_slots;
  for (const auto& e : episodes) {
    if (e->num_agents != tb.agents || e->obs_dim != tb.obs_dim || e->num_actions != tb.num_actions ||
        e->aux_slots != tb.aux_slots) {
      throw ShapeError("assemble_batch: episodes have different layouts");
    }
    tb.steps = std::max(tb.steps, e->length);
  }
  const int bsz = tb.batch, agents = tb.agents, u = tb.num_actions, h = tb.aux_slots;
  const std::size_t rows = static_cast<std::size_t>(tb.steps + 1) * bsz * agents;
  const std::size_t cells = static_cast<std::size_t>(tb.steps) * bsz * agents;
  tb.obs = Matrix<float>::Zero(tb.obs_dim, static_cast<Eigen::Index>(rows));
  tb.legal.assign(rows * u, 0);
  tb.action.assign(cells, 0);
  tb.acting.assign(cells, 0);
  tb.reward.assign(static_cast<std::size_t>(tb.steps) * bsz, 0.0f);
  tb.aux.assign(cells * h, -1);
  for (int b = 0; b < bsz; ++b) {
    const auto& e = *episodes[b];
    if (e.obs.size() != static_cast<std::size_t>(e.length + 1) * agents * tb.obs_dim ||
        e.reward.size() != static_cast<std::size_t>(e.length)) {
      throw ShapeError("assemble_batch: malformed episode");
    }
    tb.length.push_back(e.length);
    tb.truncated.push_back(e.truncated ? 1 : 0);
    for (int t = 0; t <= e.length; ++t) {
      for (int a = 0; a < agents; ++a) {
        const auto col = tb.sa(t, b, a);
        const auto src = e.obs_at(t, a);
        std::copy(src.begin(), src.end(), tb.obs.col(static_cast<Eigen::Index>(col)).data());
        const auto lg = e.legal_at(t, a);
        std::copy(lg.begin(), lg.end(), tb.legal.begin() + static_cast<std::ptrdiff_t>(col * u));
        if (t == e.length) continue;
        const auto k = e.step_index(t, a);
        tb.action[col] = e.action[k];
        tb.acting[col] = e.acting[k];
        for (int s = 0; s < h; ++s) tb.aux[col * h + s] = e.aux[k * h + s];
      }
      if (t < e.length) tb.reward[static_cast<std::size_t>(t) * bsz + b] = e.reward[t];
    }
  }
  return tb;
}

namespace {

std::span<const std::uint8_t> legal_row(const TrainBatch& tb, std::size_t col) {
  return {tb.legal.data() + col * tb.num_actions, static_cast<std::size_t>(tb.num_actions)};
}

std::span<const float> q_col(const Matrix<float>& q, std::size_t col) {
  return {q.data() + col * q.rows(), static_cast<std::size_t>(q.rows())};
}

// Target network value at the online network's greedy legal action.
double double_q_value(const TrainBatch& tb, const Matrix<float>& q_online, const Matrix<float>& q_target,
                      std::size_t col) {
  const int a_star = masked_argmax(q_col(q_online, col), legal_row(tb, col));
  return static_cast<double>(q_target(a_star, static_cast<Eigen::Index>(col)));
}

bool has_choice(const TrainBatch& tb, std::size_t col) {
  const auto row = legal_row(tb, col);
  return std::count(row.begin(), row.end(), std::uint8_t{1}) > 1;
}

}  // namespace

double joint_q(const TrainBatch& tb, const Matrix<float>& q, int t, int b) {
  double sum = 0.0;
  for (int a = 0; a < tb.agents; ++a) {
    const auto col = tb.sa(t, b, a);
    sum += static_cast<double>(q(tb.action[col], static_cast<Eigen::Index>(col)));
  }
  return sum;
}

Targets compute_targets(const TrainBatch& tb, const Matrix<float>& q_online, const Matrix<float>& q_target,
                        Mode mode, double gamma, int n_step) {
  const auto cols = static_cast<Eigen::Index>(tb.steps + 1) * tb.batch * tb.agents;
  if (q_online.cols() != cols || q_target.cols() != cols || q_online.rows() != tb.num_actions ||
      q_target.rows() != tb.num_actions) {
    throw ShapeError("compute_targets: Q matrices do not match the batch");
  }
  if (n_step < 1) throw DomainError("compute_targets: n_step must be >= 1");
  if (mode == Mode::kIql && tb.agents != 1) throw ShapeError("compute_targets: independent mode needs 1 agent");

  Targets out;
  out.steps = tb.steps;
  out.batch = tb.batch;
  out.y.assign(static_cast<std::size_t>(tb.steps) * tb.batch, 0.0);
  out.valid.assign(out.y.size(), 0);

  for (int b = 0; b < tb.batch; ++b) {
    const int len = tb.length[b];
    auto reward = [&](int t) { return static_cast<double>(tb.reward[static_cast<std::size_t>(t) * tb.batch + b]); };
    for (int t = 0; t < len; ++t) {
      int end;
      bool bootstrap;
      if (mode == Mode::kVdn) {
        end = t + std::min(n_step, len - t);
        bootstrap = end < len || tb.truncated[b];
      } else {
        if (!tb.acting[tb.sa(t, b, 0)]) continue;
        end = len;
        for (int s = t + n_step; s < len; ++s) {
          if (tb.acting[tb.sa(s, b, 0)]) {
            end = s;
            break;
          }
        }
        bootstrap = end < len || (tb.truncated[b] && has_choice(tb, tb.sa(len, b, 0)));
      }
      double g = 0.0, disc = 1.0;
      for (int k = t; k < end; ++k) {
        g += disc * reward(k);
        disc *= gamma;
      }
      if (bootstrap) {
        double v = 0.0;
        for (int a = 0; a < tb.agents; ++a) v += double_q_value(tb, q_online, q_target, tb.sa(end, b, a));
        g += disc * v;
      }
      out.y[out.index(t, b)] = g;
      out.valid[out.index(t, b)] = 1;
    }
  }
  return out;
}

Targets compute_targets(const TrainBatch& tb, const NetworkParams<float>& online, const NetworkParams<float>& target,
                        const TrainConfig& cfg) {
  const int cols = tb.columns_per_step();
  const auto q_on = nn::forward(online, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(online.shape(), cols)).q;
  const auto q_tg = nn::forward(target, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(target.shape(), cols)).q;
  return compute_targets(tb, q_on, q_tg, cfg.mode, cfg.gamma, cfg.n_step);
}

LossReport compute_loss(const TrainBatch& tb, const Matrix<float>& q, const Matrix<float>& aux_logits,
                        const Targets& targets, std::span<const double> weights, const TrainConfig& cfg,
                        Matrix<float>* d_q, Matrix<float>* d_aux) {
  if (weights.size() != static_cast<std::size_t>(tb.batch)) throw ShapeError("compute_loss: one weight per episode");
  if (targets.batch != tb.batch || targets.steps != tb.steps) throw ShapeError("compute_loss: targets mismatch");
  LossReport rep;
  rep.td_errors.resize(tb.batch);
  if (d_q) *d_q = Matrix<float>::Zero(q.rows(), q.cols());

  std::size_t valid = 0;
  for (auto v : targets.valid) valid += v;
  const double inv_m = valid > 0 ? 1.0 / static_cast<double>(valid) : 0.0;
  double td = 0.0;
  for (int b = 0; b < tb.batch; ++b) {
    for (int t = 0; t < tb.length[b]; ++t) {
      if (!targets.valid[targets.index(t, b)]) continue;
      const double delta = targets.y[targets.index(t, b)] - joint_q(tb, q, t, b);
      td += weights[b] * delta * delta;
      rep.td_errors[b].push_back(std::abs(delta));
      if (d_q) {
        const auto grad = static_cast<float>(-2.0 * weights[b] * delta * inv_m);
        for (int a = 0; a < tb.agents; ++a) {
          const auto col = tb.sa(t, b, a);
          (*d_q)(tb.action[col], static_cast<Eigen::Index>(col)) += grad;
        }
      }
    }
  }
  rep.td_loss = td * inv_m;

  const bool use_aux = cfg.aux && tb.aux_slots > 0 && aux_logits.size() > 0;
  if (d_aux) *d_aux = use_aux ? Matrix<float>::Zero(aux_logits.rows(), aux_logits.cols()) : Matrix<float>();
  if (use_aux) {
    if (aux_logits.rows() != 3 * tb.aux_slots || aux_logits.cols() != q.cols()) {
      throw ShapeError("compute_loss: aux logits do not match the batch");
    }
    std::size_t cards = 0;
    for (int b = 0; b < tb.batch; ++b)
      for (int t = 0; t < tb.length[b]; ++t)
        for (int a = 0; a < tb.agents; ++a)
          for (int s = 0; s < tb.aux_slots; ++s) cards += tb.aux[tb.sa(t, b, a) * tb.aux_slots + s] >= 0;
    const double inv_n = cards > 0 ? 1.0 / static_cast<double>(cards) : 0.0;
    double ce = 0.0;
    for (int b = 0; b < tb.batch; ++b) {
      for (int t = 0; t < tb.length[b]; ++t) {
        for (int a = 0; a < tb.agents; ++a) {
          const auto col = tb.sa(t, b, a);
          for (int s = 0; s < tb.aux_slots; ++s) {
            const int label = tb.aux[col * tb.aux_slots + s];
            if (label < 0) continue;
            double z[3], mx = -1e300;
            for (int c = 0; c < 3; ++c) {
              z[c] = aux_logits(3 * s + c, static_cast<Eigen::Index>(col));
              mx = std::max(mx, z[c]);
            }
            double se = 0.0;
            for (double v : z) se += std::exp(v - mx);
            const double lse = mx + std::log(se);
            ce += lse - z[label];
            if (d_aux) {
              for (int c = 0; c < 3; ++c) {
                const double p = std::exp(z[c] - lse);
                (*d_aux)(3 * s + c, static_cast<Eigen::Index>(col)) =
                    static_cast<float>(cfg.aux_weight * (p - (c == label ? 1.0 : 0.0)) * inv_n);
              }
            }
          }
        }
      }
    }
    rep.aux_loss = ce * inv_n;
  }
  rep.total = rep.td_loss + cfg.aux_weight * rep.aux_loss;
  if (!std::isfinite(rep.total)) throw NumericError("loss is not finite");
  return rep;
}

LossReport compute_loss(const TrainBatch& tb, const NetworkParams<float>& params, const Targets& targets,
                        std::span<const double> weights, const TrainConfig& cfg) {
  const auto out = nn::forward(params, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(params.shape(), tb.columns_per_step()));
  return compute_loss(tb, out.q, out.aux_logits, targets, weights, cfg);
}

std::vector<double> actor_td_errors(const replay::EpisodeRecord& episode, const Matrix<float>& q, Mode mode,
                                    double gamma, int n_step) {
  auto ptr = std::shared_ptr<const replay::EpisodeRecord>(&episode, [](const replay::EpisodeRecord*) {});
  const TrainBatch tb = assemble_batch(std::span(&ptr, 1));
  const Targets tg = compute_targets(tb, q, q, mode, gamma, n_step);
  std::vector<double> td;
  for (int t = 0; t < tb.length[0]; ++t) {
    if (tg.valid[tg.index(t, 0)]) td.push_back(std::abs(tg.y[tg.index(t, 0)] - joint_q(tb, q, t, 0)));
  }
  return td;
}

Trainer::Trainer(NetworkParams<float> init, TrainConfig cfg)
    : cfg_(cfg), online_(std::move(init)), target_(online_), adam_(online_.shape(), cfg.adam) {
  cfg_.validate();
}

UpdateReport Trainer::update_on(std::span<const std::shared_ptr<const replay::EpisodeRecord>> episodes,
                                std::span<const double> weights, LossReport* report) {
  const TrainBatch tb = assemble_batch(episodes);
  const int cols = tb.columns_per_step();
  nn::ForwardCache<float> cache;
  const auto on = nn::forward(online_, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(online_.shape(), cols), &cache);
  const auto tg = nn::forward(target_, tb.obs, tb.steps + 1, RecurrentState<float>::zeros(target_.shape(), cols));
  const Targets targets = compute_targets(tb, on.q, tg.q, cfg_.mode, cfg_.gamma, cfg_.n_step);
  Matrix<float> d_q, d_aux;
  LossReport loss = compute_loss(tb, on.q, on.aux_logits, targets, weights, cfg_, &d_q, &d_aux);
  auto grads = nn::backward(online_, cache, d_q, d_aux);
  UpdateReport rep;
  rep.grad_norm = nn::clip_global_norm(grads, cfg_.grad_clip);
  adam_.step(online_, grads);
  ++updates_;
  if (updates_ % cfg_.target_sync_every == 0) target_ = online_;
  rep.update = updates_;
  rep.td_loss = loss.td_loss;
  rep.aux_loss = loss.aux_loss;
  if (report) *report = std::move(loss);
  return rep;
}

UpdateReport Trainer::update(replay::PrioritizedReplay& replay, RngStream& rng) {
  auto batch = replay.sample(static_cast<std::size_t>(cfg_.batch_size), rng);
  LossReport loss;
  auto rep = update_on(batch.episodes, batch.weights, &loss);
  replay.update_priorities(batch.ids, loss.td_errors);
  return rep;
}

}  // namespace sad::train
