#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace sad::hanabi {

inline constexpr int kNumColors = 5;
inline constexpr int kNumRanks = 5;
inline constexpr int kNumCardTypes = kNumColors * kNumRanks;
inline constexpr int kDeckSize = 50;
inline constexpr int kMaxInfoTokens = 8;
inline constexpr int kMaxLifeTokens = 3;
inline constexpr int kMaxScore = kNumColors * kNumRanks;

// Colors in id order: G, B, W, Y, R.
inline constexpr std::array<char, kNumColors> kColorChars{'G', 'B', 'W', 'Y', 'R'};

// Copies of a rank (1..5) in each color: 3, 2, 2, 2, 1.
constexpr int copies_of_rank(int rank) { return rank == 1 ? 3 : rank == 5 ? 1 : 2; }

struct Card {
  int color = 0;  // 0..4
  int rank = 1;   // 1..5

  // Dense id in [0, 25): color-major.
  int type() const { return color * kNumRanks + rank - 1; }
  static Card from_type(int type) { return Card{type / kNumRanks, type % kNumRanks + 1}; }

  std::string str() const { return std::string(1, kColorChars[color]) + std::to_string(rank); }
  friend bool operator==(const Card&, const Card&) = default;
};

// "G3" -> {0, 3}. Throws ParseError.
Card parse_card(const std::string& text);

// Count of each card type in the full deck.
std::array<int, kNumCardTypes> full_deck_counts();

// What a player has been told about one of their own cards. Plausible sets
// are bitmasks (bit c for color c, bit r-1 for rank r) narrowed by positive
// and negative hints.
struct CardKnowledge {
  int revealed_color = -1;
  int revealed_rank = -1;
  std::uint8_t color_plausible = 0x1f;
  std::uint8_t rank_plausible = 0x1f;

  bool plausible(const Card& c) const {
    return ((color_plausible >> c.color) & 1) && ((rank_plausible >> (c.rank - 1)) & 1);
  }
  void apply_color_hint(int color, bool matches);
  void apply_rank_hint(int rank, bool matches);
};

}  // namespace sad::hanabi
