#include "sad/hanabi/card.hpp"

#include "sad/core/error.hpp"

namespace sad::hanabi {

Card parse_card(const std::string& text) {
  if (text.size() != 2) throw ParseError("card must look like 'G3', got '" + text + "'");
  for (int c = 0; c < kNumColors; ++c) {
    if (kColorChars[c] == text[0] && text[1] >= '1' && text[1] <= '5') {
      return Card{c, text[1] - '0'};
    }
  }
  throw ParseError("unknown card '" + text + "'");
}

std::array<int, kNumCardTypes> full_deck_counts() {
  std::array<int, kNumCardTypes> counts{};
  for (int t = 0; t < kNumCardTypes; ++t) counts[t] = copies_of_rank(Card::from_type(t).rank);
  return counts;
}

void CardKnowledge::apply_color_hint(int color, bool matches) {
  if (matches) {
    revealed_color = color;
    color_plausible = static_cast<std::uint8_t>(1u << color);
  } else {
    color_plausible &= static_cast<std::uint8_t>(~(1u << color));
  }
}

void CardKnowledge::apply_rank_hint(int rank, bool matches) {
  if (matches) {
    revealed_rank = rank;
    rank_plausible = static_cast<std::uint8_t>(1u << (rank - 1));
  } else {
    rank_plausible &= static_cast<std::uint8_t>(~(1u << (rank - 1)));
  }
}

}  // namespace sad::hanabi
