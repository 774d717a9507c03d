// Command-line entry point. Exit codes: 0 ok, 1 configuration error,
// 2 runtime failure.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sad/belief/belief.hpp"
#include "sad/core/error.hpp"
#include "sad/harness/curves.hpp"
#include "sad/harness/runner.hpp"
#include "sad/matrix_game/payoff.hpp"
#include "sad/matrix_game/solver.hpp"
#include "sad/tabular/tabular.hpp"

namespace {

using namespace sad;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

matrix_game::PayoffTensor payoff_from(const std::string& path) {
  return path.empty() ? matrix_game::default_payoff() : matrix_game::load_payoff(path);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

struct MatrixTrainArgs {
  std::string method = "both";
  long episodes = 100000;
  int seeds = 100;
  std::optional<double> lr;
  std::optional<double> epsilon;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string payoff;
  std::string curve_out;
};

int run_matrix_train(const MatrixTrainArgs& args) {
  tabular::TabularConfig base;
  base.episodes = args.episodes;
  base.seeds = args.seeds;
  if (args.lr) base.learning_rate = *args.lr;
  if (args.epsilon) base.epsilon = *args.epsilon;
  base.base_seed = args.seed;
  base.threads = args.threads;
  base.payoff = payoff_from(args.payoff);
  std::vector<std::pair<std::string, bool>> runs;
  if (args.method == "sad" || args.method == "both") runs.emplace_back("sad", true);
  if (args.method == "iql" || args.method == "both") runs.emplace_back("iql", false);
  for (const auto& [name, sad] : runs) {
    auto cfg = base;
    cfg.sad_enabled = sad;
    cfg.validate();
    const auto r = tabular::experiment(cfg);
    std::cout << name << ": mean " << std::fixed << std::setprecision(4) << r.mean << " sem " << r.sem << " over "
              << cfg.seeds << " seeds\n";
    if (args.curve_out.empty()) continue;
    std::filesystem::path out = args.curve_out;
    if (runs.size() > 1) out.replace_filename(out.stem().string() + "." + name + out.extension().string());
    write_text(out.string(), tabular::curve_csv(r.curve));
  }
  return 0;
}

struct TrainArgs {
  std::string game = "hanabi";
  std::string mode = "vdn";
  bool sad = false;
  bool aux = false;
  int players = 2;
  std::uint64_t seed = 1;
  bool desk_scale = false;
  std::optional<double> minutes;
  std::optional<long> max_updates;
  std::optional<int> actors;
  std::optional<int> envs;
  std::optional<int> hidden;
  std::optional<int> lstm_layers;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<long> capacity;
  std::optional<long> warmup;
  std::optional<int> n_step;
  std::optional<int> eval_games;
  std::optional<long> eval_every;
  std::optional<long> checkpoint_every;
  std::optional<int> steps_per_update;
  bool deterministic = false;
  std::string log;
  std::string checkpoint_dir;
  // matrix game
  long episodes = 100000;
  int seeds = 100;
};

int run_train(const TrainArgs& a) {
  if (a.game == "matrix") {
    MatrixTrainArgs m;
    m.method = a.sad ? "sad" : "iql";
    m.episodes = a.episodes;
    m.seeds = a.seeds;
    m.lr = a.lr;
    m.seed = a.seed;
    m.curve_out = a.log;
    return run_matrix_train(m);
  }
  const auto mode = a.mode == "iql" ? train::Mode::kIql : train::Mode::kVdn;
  auto cfg = a.desk_scale ? harness::RunnerConfig::desk_scale(a.players, mode)
                          : harness::RunnerConfig::full_scale(a.players, mode);
  cfg.seed = a.seed;
  cfg.train.sad = a.sad;
  cfg.train.aux = a.aux;
  if (a.minutes) cfg.time_budget_seconds = *a.minutes * 60.0;
  if (a.max_updates) cfg.max_updates = *a.max_updates;
  if (a.actors) cfg.actor_threads = *a.actors;
  if (a.envs) cfg.envs_per_thread = *a.envs;
  if (a.hidden) cfg.hidden_dim = *a.hidden;
  if (a.lstm_layers) cfg.lstm_layers = *a.lstm_layers;
  if (a.lr) cfg.train.adam.lr = *a.lr;
  if (a.batch) cfg.train.batch_size = *a.batch;
  if (a.capacity) cfg.replay.capacity = static_cast<std::size_t>(*a.capacity);
  if (a.warmup) cfg.replay.warmup = static_cast<std::size_t>(*a.warmup);
  if (a.n_step) cfg.train.n_step = *a.n_step;
  if (a.eval_games) cfg.eval_games = *a.eval_games;
  if (a.eval_every) cfg.eval_every = *a.eval_every;
  if (a.checkpoint_every) cfg.checkpoint_every = *a.checkpoint_every;
  if (a.steps_per_update) cfg.env_steps_per_update = *a.steps_per_update;
  cfg.deterministic = a.deterministic;
  cfg.log_path = a.log;
  cfg.checkpoint_dir = a.checkpoint_dir;

  const auto res = harness::run_training(cfg, [](const harness::LogRow& row) {
    std::cerr << "update " << row.update << " td " << row.td_loss << " aux " << row.aux_loss << " buffer "
              << row.buffer_size << " steps " << row.env_steps;
    if (row.eval_score) std::cerr << " eval " << *row.eval_score;
    std::cerr << '\n';
  });
  const auto& m = res.metrics;
  std::cout << std::fixed << std::setprecision(4) << "random baseline " << res.random_baseline.mean << "\n"
            << "final eval " << m.eval_mean << " sem " << m.eval_sem << "\n"
            << "updates " << m.updates << " env steps " << m.env_steps << " episodes " << m.episodes << " in "
            << m.seconds << " s\n"
            << "env steps/s " << m.env_steps_per_sec << " episodes/s " << m.episodes_per_sec << " updates/s "
            << m.updates_per_sec << "\n";
  return 0;
}

int run_eval(const std::string& checkpoint, int games, std::uint64_t seed, bool json) {
  const auto r = harness::evaluate_checkpoint(checkpoint, games, seed);
  if (json) {
    nlohmann::json j;
    j["games"] = r.games;
    j["mean"] = r.mean;
    j["sem"] = r.sem;
    j["win_rate"] = r.win_rate;
    j["histogram"] = r.histogram;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << std::fixed << std::setprecision(4) << "games " << r.games << "\nmean " << r.mean << "\nsem " << r.sem
            << "\nwin_rate " << r.win_rate << "\nhistogram";
  for (int h : r.histogram) std::cout << ' ' << h;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplified action decoder: matrix game, belief demo and Hanabi training"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags override it");

  auto* solve = app.add_subcommand("matrix-solve", "Exhaustively solve the two-step matrix game");
  std::string solve_payoff;
  solve->add_option("--payoff", solve_payoff, "Payoff file (36 numbers); default tensor if omitted");

  auto* mtrain = app.add_subcommand("matrix-train", "Tabular IQL / SAD on the matrix game");
  MatrixTrainArgs margs;
  mtrain->add_option("--method", margs.method, "sad, iql or both")->check(CLI::IsMember({"sad", "iql", "both"}));
  mtrain->add_option("--episodes", margs.episodes, "Training episodes per seed")->check(CLI::NonNegativeNumber);
  mtrain->add_option("--seeds", margs.seeds, "Independent seeds")->check(CLI::PositiveNumber);
  mtrain->add_option("--lr", margs.lr, "Learning rate");
  mtrain->add_option("--epsilon", margs.epsilon, "Exploration rate before decay");
  mtrain->add_option("--seed", margs.seed, "Base seed");
  mtrain->add_option("--threads", margs.threads, "Worker threads (0: all cores)");
  mtrain->add_option("--payoff", margs.payoff, "Payoff file");
  mtrain->add_option("--curve-out", margs.curve_out, "Learning-curve CSV; with --method both, one file per method (name.sad.csv, name.iql.csv)");

  auto* demo = app.add_subcommand("belief-demo", "Posterior blur as a function of epsilon (matrix game)");
  int demo_steps = 10;
  demo->add_option("--steps", demo_steps, "Grid intervals over epsilon in [0, 1]")->check(CLI::PositiveNumber);

  auto* trn = app.add_subcommand("train", "Train agents (Hanabi or the matrix game)");
  TrainArgs targs;
  trn->add_option("--game", targs.game, "hanabi or matrix")->check(CLI::IsMember({"hanabi", "matrix"}));
  trn->add_option("--mode", targs.mode, "iql or vdn")->check(CLI::IsMember({"iql", "vdn"}));
  trn->add_flag("--sad", targs.sad, "Feed the acting agent's greedy action to teammates");
  trn->add_flag("--aux", targs.aux, "Add the card-status auxiliary task");
  trn->add_option("--players", targs.players, "Players (2..5)")->check(CLI::Range(2, 5));
  trn->add_option("--seed", targs.seed, "Run seed");
  trn->add_flag("--desk-scale", targs.desk_scale, "Start from desk-sized defaults instead of the full-size preset");
  trn->add_option("--minutes", targs.minutes, "Wall-clock budget");
  trn->add_option("--max-updates", targs.max_updates, "Stop after this many updates");
  trn->add_option("--actors", targs.actors, "Actor threads N");
  trn->add_option("--envs", targs.envs, "Environments per actor thread K");
  trn->add_option("--hidden", targs.hidden, "Units per layer");
  trn->add_option("--lstm-layers", targs.lstm_layers, "LSTM layers");
  trn->add_option("--lr", targs.lr, "Adam learning rate");
  trn->add_option("--batch", targs.batch, "Episodes per update");
  trn->add_option("--replay-capacity", targs.capacity, "Replay capacity in episodes");
  trn->add_option("--warmup", targs.warmup, "Episodes before training starts");
  trn->add_option("--n-step", targs.n_step, "n of the n-step return");
  trn->add_option("--eval-games", targs.eval_games, "Games per evaluation");
  trn->add_option("--eval-every", targs.eval_every, "Updates between evaluations");
  trn->add_option("--checkpoint-every", targs.checkpoint_every, "Updates between checkpoints");
  trn->add_option("--steps-per-update", targs.steps_per_update, "Environment steps per update (actor throttle)");
  trn->add_flag("--deterministic", targs.deterministic, "Single-threaded reproducible schedule (needs --actors 1)");
  trn->add_option("--log", targs.log, "Training log CSV (matrix game: learning curves)");
  trn->add_option("--checkpoint-dir", targs.checkpoint_dir, "Directory for checkpoints");
  trn->add_option("--episodes", targs.episodes, "Matrix game: episodes per seed");
  trn->add_option("--seeds", targs.seeds, "Matrix game: seeds");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint greedily");
  std::string ckpt;
  int games = 1000;
  std::uint64_t eval_seed = 1;
  bool json = false;
  ev->add_option("checkpoint", ckpt, "Checkpoint directory")->required();
  ev->add_option("--games", games, "Games to play");
  ev->add_option("--seed", eval_seed, "Seed of the game set");
  ev->add_flag("--json", json, "Print JSON");

  auto* cur = app.add_subcommand("curves", "Mean and s.e.m. learning curves across runs");
  std::vector<std::string> inputs;
  std::string curves_out;
  cur->add_option("logs", inputs, "Training logs or matrix-game curve files")->required();
  cur->add_option("--out", curves_out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) {
      const auto payoff = payoff_from(solve_payoff);
      const auto r = matrix_game::solve_exhaustive(payoff);
      std::cout << "best joint value " << r.best_value << "\nbest non-communicating value " << r.best_noncomm_value
                << "\noptimal policies " << r.optimal_policy_count << "\n\n"
                << matrix_game::format_payoff(payoff);
    } else if (*mtrain) {
      return run_matrix_train(margs);
    } else if (*demo) {
      std::cout << "epsilon,unfiltered_mass,tv_from_greedy\n" << std::setprecision(10);
      for (const auto& row : belief::matrix_game_blur_sweep(demo_steps)) {
        std::cout << row.epsilon << ',' << row.unfiltered_mass << ',' << row.tv_from_greedy << '\n';
      }
    } else if (*trn) {
      return run_train(targs);
    } else if (*ev) {
      return run_eval(ckpt, games, eval_seed, json);
    } else if (*cur) {
      std::vector<harness::Series> runs;
      for (const auto& f : inputs) {
        auto s = harness::read_curve_file(f);
        runs.insert(runs.end(), s.begin(), s.end());
      }
      write_text(curves_out, harness::format_curves(harness::aggregate_curves(runs)));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
