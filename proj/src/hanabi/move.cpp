#include "sad/hanabi/move.hpp"

#include "sad/core/error.hpp"
#include "sad/hanabi/card.hpp"

namespace sad::hanabi {

std::string HanabiMove::str() const {
  switch (kind) {
    case MoveKind::kPlay:
      return "play " + std::to_string(card_index);
    case MoveKind::kDiscard:
      return "discard " + std::to_string(card_index);
    case MoveKind::kHintColor:
      return "hint +" + std::to_string(target_offset) + " color " + kColorChars[color];
    case MoveKind::kHintRank:
      return "hint +" + std::to_string(target_offset) + " rank " + std::to_string(rank);
  }
  return "?";
}

MoveCodec::MoveCodec(int players, int hand_size) : players_(players), hand_size_(hand_size) {
  if (players < 2 || players > 5) throw DomainError("players must lie in [2, 5]");
}

int MoveCodec::encode(const HanabiMove& m) const {
  const int hints = 5 * (players_ - 1);
  switch (m.kind) {
    case MoveKind::kPlay:
    case MoveKind::kDiscard:
      if (m.card_index < 0 || m.card_index >= hand_size_) throw RuleViolation("card index out of range");
      return (m.kind == MoveKind::kPlay ? 0 : hand_size_) + m.card_index;
    case MoveKind::kHintColor:
    case MoveKind::kHintRank: {
      if (m.target_offset < 1 || m.target_offset >= players_) throw RuleViolation("hint target out of range");
      const int value = m.kind == MoveKind::kHintColor ? m.color : m.rank - 1;
      if (value < 0 || value >= 5) throw RuleViolation("hint value out of range");
      const int base = 2 * hand_size_ + (m.kind == MoveKind::kHintColor ? 0 : hints);
      return base + (m.target_offset - 1) * 5 + value;
    }
  }
  throw RuleViolation("unknown move kind");
}

HanabiMove MoveCodec::decode(int id) const {
  if (id < 0 || id >= num_moves()) throw RuleViolation("move id " + std::to_string(id) + " out of range");
  if (id < hand_size_) return HanabiMove::play(id);
  id -= hand_size_;
  if (id < hand_size_) return HanabiMove::discard(id);
  id -= hand_size_;
  const int hints = 5 * (players_ - 1);
  if (id < hints) return HanabiMove::hint_color(id / 5 + 1, id % 5);
  id -= hints;
  return HanabiMove::hint_rank(id / 5 + 1, id % 5 + 1);
}

}  // namespace sad::hanabi
