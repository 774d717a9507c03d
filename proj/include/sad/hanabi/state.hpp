#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sad/hanabi/card.hpp"
#include "sad/hanabi/move.hpp"

namespace sad::hanabi {

inline constexpr int kDefaultMaxSteps = 80;

constexpr int hand_size_for(int players) { return players <= 3 ? 5 : 4; }

// Public record of the most recent move.
struct LastMove {
  int player = -1;
  HanabiMove move;
  int move_id = -1;
  std::optional<Card> card;   // card played or discarded
  bool success = false;       // play landed on a firework
  bool bonus = false;         // completed a firework and regained a token
  std::uint32_t revealed = 0; // hinted positions in the target's hand
};

struct MoveOutcome {
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
};

class HanabiState {
 public:
  // Shuffles a fresh 50-card deck with the given seed and deals.
  static HanabiState new_game(int players, std::uint64_t seed, int max_steps = kDefaultMaxSteps);
  // Deals from `draw_order`, first element drawn first. Must be a full deck.
  static HanabiState from_deck(int players, const std::vector<Card>& draw_order,
                               int max_steps = kDefaultMaxSteps);

  int players() const { return players_; }
  int hand_size() const { return hand_size_; }
  const MoveCodec& codec() const { return codec_; }

  const std::vector<Card>& hand(int player) const { return hands_[player]; }
  const std::vector<CardKnowledge>& knowledge(int player) const { return knowledge_[player]; }
  const std::array<int, kNumColors>& fireworks() const { return fireworks_; }
  const std::vector<Card>& discards() const { return discards_; }
  int deck_size() const { return static_cast<int>(deck_.size()); }
  int info_tokens() const { return info_tokens_; }
  int life_tokens() const { return life_tokens_; }
  int current_player() const { return current_player_; }
  int turns_after_deck_empty() const { return turns_after_deck_empty_; }
  int steps() const { return steps_; }
  int max_steps() const { return max_steps_; }
  const std::optional<LastMove>& last_move() const { return last_move_; }

  // Sum of firework tops; 0 once the team has bombed out.
  int score() const;
  int fireworks_total() const;
  bool terminal() const { return terminal_; }
  bool truncated() const { return truncated_; }

  // Mask over move ids [0, num_moves). Throws DomainError when terminal.
  std::vector<bool> legal_moves() const;
  bool is_legal(const HanabiMove& move) const;
  // Moves the rules would allow if the step cap had not ended the game.
  // Throws DomainError after a natural game end.
  std::vector<bool> continuation_moves() const;

  // Throws RuleViolation for illegal moves or when the episode has finished.
  MoveOutcome apply_move(const HanabiMove& move);
  MoveOutcome apply_move_id(int move_id) { return apply_move(codec_.decode(move_id)); }

  // Card-conservation and token-bound checks; throws InvariantViolation.
  void check_invariants() const;

  // Test hook: swap one of a player's hand cards with a card still in the deck.
  void swap_hand_with_deck(int player, int slot, int deck_index);

 private:
  HanabiState(int players, std::vector<Card> deck, int max_steps);
  void draw(int player);
  bool rules_allow(const HanabiMove& move) const;

  int players_;
  int hand_size_;
  MoveCodec codec_;
  int max_steps_;
  std::vector<Card> deck_;  // back is drawn next
  std::vector<std::vector<Card>> hands_;
  std::vector<std::vector<CardKnowledge>> knowledge_;
  std::array<int, kNumColors> fireworks_{};
  std::vector<Card> discards_;
  int info_tokens_ = kMaxInfoTokens;
  int life_tokens_ = kMaxLifeTokens;
  int current_player_ = 0;
  int turns_after_deck_empty_ = 0;
  int steps_ = 0;
  bool terminal_ = false;
  bool truncated_ = false;
  std::optional<LastMove> last_move_;
};

}  // namespace sad::hanabi
