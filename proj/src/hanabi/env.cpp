#include "sad/hanabi/env.hpp"

#include <fstream>
#include <sstream>

#include "sad/core/error.hpp"

namespace sad::hanabi {

HanabiEnv::HanabiEnv(int players, std::uint64_t seed, int max_steps)
    : HanabiEnv(HanabiState::new_game(players, seed, max_steps)) {}

HanabiEnv::HanabiEnv(HanabiState state)
    : state_(std::move(state)), encoder_(state_.players(), false) {}

std::vector<bool> HanabiEnv::legal_actions(AgentId agent) const {
  return encoder_.legal_mask(state_, agent.index);
}

StepResult HanabiEnv::step(const std::vector<int>& joint_action) {
  check_joint_action(*this, joint_action);
  const auto out = state_.apply_move_id(joint_action[state_.current_player()]);
  return StepResult{out.reward, out.done, out.truncated};
}

AgentObservation HanabiEnv::observe(AgentId agent) const {
  AgentObservation obs;
  obs.features = encoder_.encode(state_, agent.index);
  obs.legal = encoder_.legal_mask(state_, agent.index);
  if (state_.last_move()) obs.last_action = state_.last_move()->move_id;
  return obs;
}

GameReplay parse_replay(const std::string& text) {
  GameReplay r;
  bool have_players = false, have_seed = false, have_moves = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string key;
    if (!(in >> key)) continue;
    if (key == "players") {
      if (!(in >> r.players)) throw ParseError("replay: bad players line");
      have_players = true;
    } else if (key == "seed") {
      if (!(in >> r.seed)) throw ParseError("replay: bad seed line");
      have_seed = true;
    } else if (key == "max_steps") {
      if (!(in >> r.max_steps)) throw ParseError("replay: bad max_steps line");
    } else if (key == "moves") {
      int id;
      while (in >> id) r.moves.push_back(id);
      if (!in.eof()) throw ParseError("replay: non-integer move id");
      have_moves = true;
    } else {
      throw ParseError("replay: unknown key '" + key + "'");
    }
  }
  if (!have_players || !have_seed || !have_moves) throw ParseError("replay: needs players, seed and moves");
  return r;
}

GameReplay load_replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open replay " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_replay(buf.str());
}

std::string format_replay(const GameReplay& r) {
  std::ostringstream out;
  out << "players " << r.players << "\nseed " << r.seed << "\nmax_steps " << r.max_steps << "\nmoves";
  for (int m : r.moves) out << ' ' << m;
  out << '\n';
  return out.str();
}

ReplayResult run_replay(const GameReplay& replay) {
  ReplayResult result{HanabiState::new_game(replay.players, replay.seed, replay.max_steps), 0.0};
  for (int id : replay.moves) result.episode_return += result.state.apply_move_id(id).reward;
  return result;
}

}  // namespace sad::hanabi
