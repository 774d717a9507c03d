#pragma once

#include <string>

namespace sad::hanabi {

enum class MoveKind { kPlay, kDiscard, kHintColor, kHintRank };

// Hint targets are offsets (1..players-1) from the moving player so that one
// action id means the same thing to every seat.
struct HanabiMove {
  MoveKind kind = MoveKind::kPlay;
  int card_index = -1;
  int target_offset = -1;
  int color = -1;
  int rank = -1;

  static HanabiMove play(int index) { return {MoveKind::kPlay, index, -1, -1, -1}; }
  static HanabiMove discard(int index) { return {MoveKind::kDiscard, index, -1, -1, -1}; }
  static HanabiMove hint_color(int offset, int color) { return {MoveKind::kHintColor, -1, offset, color, -1}; }
  static HanabiMove hint_rank(int offset, int rank) { return {MoveKind::kHintRank, -1, offset, -1, rank}; }

  std::string str() const;
  friend bool operator==(const HanabiMove&, const HanabiMove&) = default;
};

// Flat id layout for a fixed player count:
//   [0, H)                     play slot i
//   [H, 2H)                    discard slot i
//   [2H, 2H + 5(P-1))          hint color, (offset-1)*5 + color
//   [2H + 5(P-1), 2H + 10(P-1)) hint rank,  (offset-1)*5 + rank-1
//   num_moves()                noop, used by players who are not acting
class MoveCodec {
 public:
  MoveCodec(int players, int hand_size);

  int num_moves() const { return 2 * hand_size_ + 10 * (players_ - 1); }
  int noop() const { return num_moves(); }
  int num_actions() const { return num_moves() + 1; }

  int encode(const HanabiMove& move) const;
  HanabiMove decode(int id) const;

 private:
  int players_;
  int hand_size_;
};

}  // namespace sad::hanabi
