#include "sad/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "sad/core/error.hpp"

namespace sad::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void RunnerConfig::validate() const {
  if (actor_threads < 1 || envs_per_thread < 1) throw ConfigError("actor_threads and envs_per_thread must be >= 1");
  if (players < 2 || players > 5) throw ConfigError("players must be 2..5");
  if (hidden_dim < 1 || lstm_layers < 1) throw ConfigError("network sizes must be positive");
  if (eval_games < 1) throw ConfigError("eval_games must be >= 1");
  if (eval_every < 1 || log_every < 1) throw ConfigError("eval_every and log_every must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) throw ConfigError("checkpoint_every needs checkpoint_dir");
  if (time_budget_seconds <= 0.0 && max_updates <= 0) throw ConfigError("set a time budget or an update limit");
  if (deterministic && actor_threads != 1) throw ConfigError("deterministic mode needs actor_threads = 1");
  if (env_steps_per_update < 0 || (deterministic && env_steps_per_update < 1)) {
    throw ConfigError("env_steps_per_update must be >= 1 (or 0 to disable the limit in threaded mode)");
  }
  if (!(base_epsilon >= 0.0 && base_epsilon <= 1.0)) throw ConfigError("base_epsilon must lie in [0, 1]");
  if (replay.capacity < 1 || replay.warmup > replay.capacity) throw ConfigError("replay warm-up exceeds capacity");
  if (static_cast<std::size_t>(train.batch_size) > replay.capacity) throw ConfigError("batch exceeds replay capacity");
  train.validate();
}

ActorConfig RunnerConfig::actor_config() const {
  ActorConfig a;
  a.players = players;
  a.max_steps = max_steps;
  a.sad = train.sad;
  a.aux = train.aux;
  a.mode = train.mode;
  a.gamma = train.gamma;
  a.n_step = train.n_step;
  a.eta = replay.eta;
  a.slot_source = train::SlotSource::kSideChannel;
  return a;
}

nn::NetworkShape RunnerConfig::network_shape() const {
  return harness::network_shape(actor_config(), hidden_dim, lstm_layers);
}

RunnerConfig RunnerConfig::full_scale(int players, train::Mode mode) {
  RunnerConfig c;
  c.players = players;
  c.actor_threads = 80;
  c.envs_per_thread = 80;
  c.hidden_dim = 512;
  c.lstm_layers = 2;
  c.train.mode = mode;
  c.replay.warmup = 10000;
  if (mode == train::Mode::kIql) {
    c.replay.capacity = std::size_t{1} << 17;
    c.train.batch_size = 128;
  } else {
    c.replay.capacity = players <= 2 ? std::size_t{1} << 16 : std::size_t{1} << 15;
    static const int kBatch[] = {64, 43, 32, 26};
    c.train.batch_size = kBatch[std::clamp(players, 2, 5) - 2];
  }
  c.time_budget_seconds = 72.0 * 3600.0;
  return c;
}

RunnerConfig RunnerConfig::desk_scale(int players, train::Mode mode) {
  RunnerConfig c;
  c.players = players;
  c.actor_threads = 4;
  c.envs_per_thread = 16;
  c.hidden_dim = 64;
  c.lstm_layers = 2;
  c.train.mode = mode;
  c.env_steps_per_update = 500;
  c.train.batch_size = 16;
  c.train.adam.lr = 1e-3;
  c.train.target_sync_every = 250;
  c.train.actor_sync_every = 10;
  c.replay.capacity = std::size_t{1} << 12;
  c.replay.warmup = 256;
  c.eval_games = 500;
  c.eval_every = 250;
  c.time_budget_seconds = 30.0 * 60.0;
  return c;
}

void ParamStore::publish(const nn::NetworkParams<float>& params) {
  auto copy = std::make_shared<const nn::NetworkParams<float>>(params);
  const auto sum = nn::params_checksum(*copy);
  std::lock_guard lock(mu_);
  current_.params = std::move(copy);
  current_.checksum = sum;
  current_.version = version_.load(std::memory_order_relaxed) + 1;
  version_.store(current_.version, std::memory_order_release);
}

Snapshot ParamStore::latest() const {
  std::lock_guard lock(mu_);
  return current_;
}

void verify_snapshot(const Snapshot& s) {
  if (!s.params || nn::params_checksum(*s.params) != s.checksum) {
    throw InvariantViolation("parameter snapshot checksum mismatch (version " + std::to_string(s.version) + ")");
  }
}

std::string log_header() { return "update,td_loss,aux_loss,buffer_size,eval_score"; }

std::string format_log_row(const LogRow& r) {
  std::ostringstream os;
  os.precision(9);
  os << r.update << ',' << r.td_loss << ',' << r.aux_loss << ',' << r.buffer_size << ',';
  if (r.eval_score) os << *r.eval_score;
  return os.str();
}

RunResult run_training(const RunnerConfig& cfg, const LogCallback& on_log) {
  cfg.validate();
  const auto t0 = Clock::now();
  const ActorConfig acfg = cfg.actor_config();
  const RngStream root(cfg.seed, 0);
  RngStream init_rng = root.split(1);
  RngStream sample_rng = root.split(2);
  const std::uint64_t eval_seed = mix64(cfg.seed ^ 0xe7a15eedULL);

  RunResult res;
  res.random_baseline = random_policy_baseline(cfg.players, cfg.eval_games, eval_seed, cfg.max_steps);

  train::Trainer trainer(nn::NetworkParams<float>::init(cfg.network_shape(), init_rng), cfg.train);
  replay::PrioritizedReplay replay(cfg.replay);
  ParamStore store;
  store.publish(trainer.online());
  const auto eps = actor_epsilons(cfg.actor_threads * cfg.envs_per_thread, cfg.base_epsilon, cfg.alpha);

  std::ofstream log_file;
  if (!cfg.log_path.empty()) {
    log_file.open(cfg.log_path);
    if (!log_file) throw IoError("cannot write training log " + cfg.log_path.string());
    log_file << log_header() << '\n';
  }

  std::atomic<long> env_steps{0}, episodes{0}, updates_done{0}, steps_at_ready{-1};
  std::atomic<bool> stop{false};
  std::mutex eval_mu;
  std::optional<double> pending_eval;
  long last_logged_steps = -1;

  EvalOptions eval_opts;
  eval_opts.players = cfg.players;
  eval_opts.sad = cfg.train.sad;
  eval_opts.max_steps = cfg.max_steps;

  auto record_eval = [&](const EvalResult& r, long update, long steps, double secs) {
    std::lock_guard lock(eval_mu);
    res.evals.push_back(EvalPoint{update, steps, secs, r.mean, r.sem});
    pending_eval = r.mean;
    if (cfg.stop_at_eval && r.mean >= *cfg.stop_at_eval) stop = true;
  };

  auto push = [&](std::vector<FinishedEpisode>& done) {
    for (auto& fin : done) {
      for (std::size_t i = 0; i < fin.records.size(); ++i) replay.add(std::move(fin.records[i]), fin.priorities[i]);
      episodes.fetch_add(1, std::memory_order_relaxed);
    }
    done.clear();
  };

  auto after_update = [&](const train::UpdateReport& rep) {
    if (!std::isfinite(rep.td_loss) || !std::isfinite(rep.aux_loss)) res.losses_finite = false;
    if (rep.update % cfg.train.actor_sync_every == 0) store.publish(trainer.online());
    if (cfg.checkpoint_every > 0 && rep.update % cfg.checkpoint_every == 0) {
      nn::save_checkpoint(cfg.checkpoint_dir / "latest", make_checkpoint(trainer.online(), acfg));
    }
    if (rep.update % cfg.log_every == 0) {
      LogRow row;
      row.update = rep.update;
      row.td_loss = rep.td_loss;
      row.aux_loss = rep.aux_loss;
      row.buffer_size = replay.size();
      row.env_steps = env_steps.load();
      row.seconds = seconds_since(t0);
      {
        std::lock_guard lock(eval_mu);
        row.eval_score = pending_eval;
        pending_eval.reset();
      }
      if (row.env_steps < last_logged_steps) res.counters_monotone = false;
      last_logged_steps = row.env_steps;
      if (log_file) log_file << format_log_row(row) << '\n' << std::flush;
      if (on_log) on_log(row);
      res.log.push_back(row);
    }
  };

  auto out_of_budget = [&] {
    if (cfg.max_updates > 0 && trainer.updates() >= cfg.max_updates) return true;
    return cfg.time_budget_seconds > 0.0 && seconds_since(t0) >= cfg.time_budget_seconds;
  };

  if (cfg.deterministic) {
    HanabiActor actor(acfg, eps, root.split(100));
    std::vector<FinishedEpisode> done;
    Snapshot snap = store.latest();
    long owed = 0;
    while (!stop && !out_of_budget()) {
      actor.step(*snap.params, done);
      push(done);
      env_steps = actor.env_steps();
      owed += actor.games();
      while (replay.ready() && owed >= cfg.env_steps_per_update && !stop && !out_of_budget()) {
        owed -= cfg.env_steps_per_update;
        const auto rep = trainer.update(replay, sample_rng);
        after_update(rep);
        if (rep.update % cfg.train.actor_sync_every == 0) snap = store.latest();
        if (rep.update % cfg.eval_every == 0) {
          record_eval(evaluate_policy(trainer.online(), eval_opts, cfg.eval_games, eval_seed), rep.update,
                      env_steps.load(), seconds_since(t0));
        }
      }
    }
  } else {
    std::mutex err_mu;
    std::exception_ptr error;
    auto fail = [&](std::exception_ptr e) {
      std::lock_guard lock(err_mu);
      if (!error) error = e;
      stop = true;
    };

    std::vector<std::thread> actors;
    for (int i = 0; i < cfg.actor_threads; ++i) {
      actors.emplace_back([&, i] {
        try {
          const std::vector<double> mine(eps.begin() + i * cfg.envs_per_thread,
                                         eps.begin() + (i + 1) * cfg.envs_per_thread);
          HanabiActor actor(acfg, mine, root.split(100 + static_cast<std::uint64_t>(i)));
          std::vector<FinishedEpisode> done;
          Snapshot snap = store.latest();
          while (!stop.load(std::memory_order_relaxed)) {
            const long ready_at = steps_at_ready.load(std::memory_order_relaxed);
            if (cfg.env_steps_per_update > 0 && ready_at >= 0 &&
                env_steps.load(std::memory_order_relaxed) >=
                    ready_at + (updates_done.load(std::memory_order_relaxed) + 1) * cfg.env_steps_per_update) {
              std::this_thread::sleep_for(std::chrono::microseconds(200));
              continue;
            }
            if (store.version() != snap.version) {
              snap = store.latest();
              if (cfg.verify_snapshots) verify_snapshot(snap);
            }
            actor.step(*snap.params, done);
            env_steps.fetch_add(actor.games(), std::memory_order_relaxed);
            push(done);
          }
        } catch (...) {
          fail(std::current_exception());
        }
      });
    }

    struct EvalJob {
      Snapshot snap;
      long update, steps;
      double seconds;
    };
    std::optional<EvalJob> job;
    std::condition_variable job_cv;
    bool eval_busy = false;
    std::thread evaluator([&] {
      try {
        for (;;) {
          EvalJob j;
          {
            std::unique_lock lock(eval_mu);
            job_cv.wait(lock, [&] { return job.has_value() || stop.load(); });
            if (!job) return;
            j = std::move(*job);
            job.reset();
            eval_busy = true;
          }
          const auto r = evaluate_policy(*j.snap.params, eval_opts, cfg.eval_games, eval_seed);
          record_eval(r, j.update, j.steps, j.seconds);
          std::lock_guard lock(eval_mu);
          eval_busy = false;
        }
      } catch (...) {
        fail(std::current_exception());
      }
    });

    try {
      while (!stop && !out_of_budget()) {
        if (!replay.ready()) {
          std::this_thread::sleep_for(std::chrono::milliseconds(5));
          continue;
        }
        if (steps_at_ready.load() < 0) steps_at_ready = env_steps.load();
        const auto rep = trainer.update(replay, sample_rng);
        updates_done = rep.update;
        after_update(rep);
        if (rep.update % cfg.eval_every == 0) {
          std::lock_guard lock(eval_mu);
          if (!eval_busy && !job) {
            auto snap = std::make_shared<const nn::NetworkParams<float>>(trainer.online());
            job = EvalJob{Snapshot{snap, static_cast<std::uint64_t>(rep.update), 0}, rep.update, env_steps.load(),
                          seconds_since(t0)};
            job_cv.notify_one();
          }
        }
      }
    } catch (...) {
      fail(std::current_exception());
    }
    stop = true;
    job_cv.notify_all();
    for (auto& t : actors) t.join();
    evaluator.join();
    if (error) std::rethrow_exception(error);
  }

  const double secs = seconds_since(t0);
  const auto final_eval = evaluate_policy(trainer.online(), eval_opts, cfg.eval_games, eval_seed);
  res.evals.push_back(EvalPoint{trainer.updates(), env_steps.load(), secs, final_eval.mean, final_eval.sem});
  if (!cfg.checkpoint_dir.empty()) {
    nn::save_checkpoint(cfg.checkpoint_dir / "final", make_checkpoint(trainer.online(), acfg));
  }
  res.metrics.env_steps = env_steps.load();
  res.metrics.episodes = episodes.load();
  res.metrics.updates = trainer.updates();
  res.metrics.seconds = secs;
  res.metrics.env_steps_per_sec = secs > 0 ? static_cast<double>(res.metrics.env_steps) / secs : 0.0;
  res.metrics.episodes_per_sec = secs > 0 ? static_cast<double>(res.metrics.episodes) / secs : 0.0;
  res.metrics.updates_per_sec = secs > 0 ? static_cast<double>(res.metrics.updates) / secs : 0.0;
  res.metrics.eval_mean = final_eval.mean;
  res.metrics.eval_sem = final_eval.sem;
  res.params = trainer.online();
  return res;
}

ThroughputResult measure_throughput(const ActorConfig& cfg, const nn::NetworkParams<float>& params, int games,
                                    double min_seconds, std::uint64_t seed) {
  HanabiActor actor(cfg, std::vector<double>(games, 0.1), RngStream(seed, 0));
  std::vector<FinishedEpisode> done;
  actor.step(params, done);  // warm caches and allocations
  done.clear();
  const long start_steps = actor.env_steps();
  const auto t0 = Clock::now();
  double secs = 0.0;
  do {
    for (int i = 0; i < 8; ++i) actor.step(params, done);
    done.clear();
    secs = seconds_since(t0);
  } while (secs < min_seconds);
  ThroughputResult r;
  r.env_steps = actor.env_steps() - start_steps;
  r.seconds = secs;
  r.steps_per_sec = static_cast<double>(r.env_steps) / secs;
  return r;
}

}  // namespace sad::harness
