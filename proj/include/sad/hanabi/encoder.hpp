#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sad/hanabi/state.hpp"

namespace sad::hanabi {

// Bumped whenever the block layout below changes; embedded in checkpoints.
inline constexpr std::string_view kEncoderVersion = "sad-hanabi-enc-v1";

// Feature blocks, in order, for an observer in a P-player game with hand
// size H (players are listed by offset 1..P-1 from the observer):
//   hands      (P-1) x H x 25  one-hot card type per teammate slot
//   missing    P               observer-relative "hand has fewer than H cards"
//   deck       50 - P*H        thermometer of cards left in the deck
//   fireworks  5 x 5           one-hot top rank per color
//   info       8               thermometer
//   life       3               thermometer
//   discards   5 x 10          per color thermometers: 3,2,2,2,1 for ranks 1..5
//   last_move  P + 4 + P + 5 + 5 + H + H + 25 + 1 + 1
//              actor offset, kind, hint target offset, hinted color, hinted
//              rank, revealed slots, played/discarded slot, card, success, bonus
//   v0         H x 25          own-hand V0 belief, zero rows for empty slots
//   greedy     |U| + 1         SAD greedy-action slot, last entry = NONE
//                              (present only when enabled)
struct EncoderLayout {
  int hands = 0, missing = 0, deck = 0, fireworks = 0, info = 0, life = 0, discards = 0,
      last_move = 0, v0 = 0, greedy = 0, total = 0;
};

enum class CardStatus { kPlayable = 0, kDiscardable = 1, kUnknown = 2 };
inline constexpr int kNumCardStatus = 3;

class ObservationEncoder {
 public:
  ObservationEncoder(int players, bool greedy_slot);

  int players() const { return players_; }
  int hand_size() const { return hand_size_; }
  int num_actions() const { return codec_.num_actions(); }
  int noop() const { return codec_.noop(); }
  bool greedy_slot() const { return greedy_slot_; }
  int feature_dim() const { return layout_.total; }
  const EncoderLayout& layout() const { return layout_; }

  // greedy_action: the acting teammate's greedy action id from the previous
  // step, or nullopt for NONE.
  std::vector<float> encode(const HanabiState& state, int agent,
                            std::optional<int> greedy_action = std::nullopt) const;
  void encode_into(const HanabiState& state, int agent, std::optional<int> greedy_action,
                   std::span<float> out) const;

  // Mask over the num_actions() ids. The acting player gets its legal moves,
  // everyone else (and everyone once the game is over) only noop.
  std::vector<bool> legal_mask(const HanabiState& state, int agent) const;
  void legal_mask_into(const HanabiState& state, int agent, std::span<std::uint8_t> out) const;
  // As legal_mask_into, but a game cut by the step cap keeps the mask it
  // would have had; used to bootstrap through truncation.
  void continuation_mask_into(const HanabiState& state, int agent, std::span<std::uint8_t> out) const;

 private:
  int players_;
  int hand_size_;
  bool greedy_slot_;
  MoveCodec codec_;
  EncoderLayout layout_;
};

// Publicly remaining copies of each card type from the agent's seat: full
// deck minus teammates' hands, discards and played cards.
std::array<int, kNumCardTypes> public_remaining_counts(const HanabiState& state, int agent);

// Per own slot distribution over the 25 card types, proportional to the
// remaining count times hint consistency.
std::vector<std::array<double, kNumCardTypes>> v0_belief(const HanabiState& state, int agent);

CardStatus card_status(const HanabiState& state, const Card& card);

// Ground-truth status of each own slot, as int(CardStatus); -1 for empty
// slots. Always hand_size entries.
std::vector<int> aux_targets(const HanabiState& state, int agent);

}  // namespace sad::hanabi
