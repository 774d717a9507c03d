#include "sad/hanabi/encoder.hpp"

#include <algorithm>

#include "sad/core/error.hpp"

namespace sad::hanabi {

namespace {

constexpr int kDiscardBitsPerColor = 10;

int discard_bit_offset(int rank) {
  int offset = 0;
  for (int r = 1; r < rank; ++r) offset += copies_of_rank(r);
  return offset;
}

}  // namespace

ObservationEncoder::ObservationEncoder(int players, bool greedy_slot)
    : players_(players),
      hand_size_(hand_size_for(players)),
      greedy_slot_(greedy_slot),
      codec_(players, hand_size_for(players)) {
  auto& l = layout_;
  l.hands = (players_ - 1) * hand_size_ * kNumCardTypes;
  l.missing = players_;
  l.deck = kDeckSize - players_ * hand_size_;
  l.fireworks = kNumColors * kNumRanks;
  l.info = kMaxInfoTokens;
  l.life = kMaxLifeTokens;
  l.discards = kNumColors * kDiscardBitsPerColor;
  l.last_move = players_ + 4 + players_ + kNumColors + kNumRanks + hand_size_ + hand_size_ +
                kNumCardTypes + 1 + 1;
  l.v0 = hand_size_ * kNumCardTypes;
  l.greedy = greedy_slot_ ? codec_.num_actions() + 1 : 0;
  l.total = l.hands + l.missing + l.deck + l.fireworks + l.info + l.life + l.discards +
            l.last_move + l.v0 + l.greedy;
}

std::vector<float> ObservationEncoder::encode(const HanabiState& state, int agent,
                                              std::optional<int> greedy_action) const {
  std::vector<float> out(layout_.total);
  encode_into(state, agent, greedy_action, out);
  return out;
}

void ObservationEncoder::encode_into(const HanabiState& state, int agent,
                                     std::optional<int> greedy_action, std::span<float> out) const {
  if (state.players() != players_) throw ShapeError("encoder built for a different player count");
  if (agent < 0 || agent >= players_) throw DomainError("agent out of range");
  if (static_cast<int>(out.size()) != layout_.total) throw ShapeError("encode: output size mismatch");
  std::fill(out.begin(), out.end(), 0.0f);
  std::size_t pos = 0;

  for (int off = 1; off < players_; ++off) {
    const auto& hand = state.hand((agent + off) % players_);
    for (std::size_t i = 0; i < hand.size(); ++i) {
      out[pos + ((off - 1) * hand_size_ + i) * kNumCardTypes + hand[i].type()] = 1.0f;
    }
  }
  pos += layout_.hands;

  for (int off = 0; off < players_; ++off) {
    if (static_cast<int>(state.hand((agent + off) % players_).size()) < hand_size_) out[pos + off] = 1.0f;
  }
  pos += layout_.missing;

  for (int i = 0; i < state.deck_size() && i < layout_.deck; ++i) out[pos + i] = 1.0f;
  pos += layout_.deck;

  for (int c = 0; c < kNumColors; ++c) {
    if (state.fireworks()[c] > 0) out[pos + c * kNumRanks + state.fireworks()[c] - 1] = 1.0f;
  }
  pos += layout_.fireworks;

  for (int i = 0; i < state.info_tokens(); ++i) out[pos + i] = 1.0f;
  pos += layout_.info;
  for (int i = 0; i < state.life_tokens(); ++i) out[pos + i] = 1.0f;
  pos += layout_.life;

  std::array<int, kNumCardTypes> discarded{};
  for (const auto& c : state.discards()) ++discarded[c.type()];
  for (int t = 0; t < kNumCardTypes; ++t) {
    const Card c = Card::from_type(t);
    const int base = pos + c.color * kDiscardBitsPerColor + discard_bit_offset(c.rank);
    for (int k = 0; k < discarded[t]; ++k) out[base + k] = 1.0f;
  }
  pos += layout_.discards;

  if (const auto& lm = state.last_move()) {
    std::size_t p = pos;
    out[p + (lm->player - agent + players_) % players_] = 1.0f;
    p += players_;
    out[p + static_cast<int>(lm->move.kind)] = 1.0f;
    p += 4;
    const bool hint = lm->move.kind == MoveKind::kHintColor || lm->move.kind == MoveKind::kHintRank;
    if (hint) {
      const int target = (lm->player + lm->move.target_offset) % players_;
      out[p + (target - agent + players_) % players_] = 1.0f;
    }
    p += players_;
    if (lm->move.kind == MoveKind::kHintColor) out[p + lm->move.color] = 1.0f;
    p += kNumColors;
    if (lm->move.kind == MoveKind::kHintRank) out[p + lm->move.rank - 1] = 1.0f;
    p += kNumRanks;
    for (int i = 0; i < hand_size_; ++i) {
      if ((lm->revealed >> i) & 1u) out[p + i] = 1.0f;
    }
    p += hand_size_;
    if (!hint) out[p + lm->move.card_index] = 1.0f;
    p += hand_size_;
    if (lm->card) out[p + lm->card->type()] = 1.0f;
    p += kNumCardTypes;
    out[p++] = lm->success ? 1.0f : 0.0f;
    out[p++] = lm->bonus ? 1.0f : 0.0f;
  }
  pos += layout_.last_move;

  const auto belief = v0_belief(state, agent);
  for (std::size_t i = 0; i < belief.size(); ++i) {
    for (int t = 0; t < kNumCardTypes; ++t) {
      out[pos + i * kNumCardTypes + t] = static_cast<float>(belief[i][t]);
    }
  }
  pos += layout_.v0;

  if (greedy_slot_) {
    const int slot = greedy_action ? *greedy_action : codec_.num_actions();
    if (slot < 0 || slot > codec_.num_actions()) throw DomainError("greedy action out of range");
    out[pos + slot] = 1.0f;
  }
}

std::vector<bool> ObservationEncoder::legal_mask(const HanabiState& state, int agent) const {
  std::vector<std::uint8_t> raw(num_actions());
  legal_mask_into(state, agent, raw);
  return std::vector<bool>(raw.begin(), raw.end());
}

void ObservationEncoder::legal_mask_into(const HanabiState& state, int agent,
                                         std::span<std::uint8_t> out) const {
  if (static_cast<int>(out.size()) != num_actions()) throw ShapeError("legal mask size mismatch");
  std::fill(out.begin(), out.end(), 0);
  if (state.terminal() || state.current_player() != agent) {
    out[codec_.noop()] = 1;
    return;
  }
  const auto moves = state.legal_moves();
  for (std::size_t i = 0; i < moves.size(); ++i) out[i] = moves[i] ? 1 : 0;
}

void ObservationEncoder::continuation_mask_into(const HanabiState& state, int agent,
                                                std::span<std::uint8_t> out) const {
  if (!state.truncated()) {
    legal_mask_into(state, agent, out);
    return;
  }
  if (static_cast<int>(out.size()) != num_actions()) throw ShapeError("legal mask size mismatch");
  std::fill(out.begin(), out.end(), 0);
  if (state.current_player() != agent) {
    out[codec_.noop()] = 1;
    return;
  }
  const auto moves = state.continuation_moves();
  for (std::size_t i = 0; i < moves.size(); ++i) out[i] = moves[i] ? 1 : 0;
}

std::array<int, kNumCardTypes> public_remaining_counts(const HanabiState& state, int agent) {
  auto counts = full_deck_counts();
  for (int p = 0; p < state.players(); ++p) {
    if (p == agent) continue;
    for (const auto& c : state.hand(p)) --counts[c.type()];
  }
  for (const auto& c : state.discards()) --counts[c.type()];
  for (int color = 0; color < kNumColors; ++color) {
    for (int r = 1; r <= state.fireworks()[color]; ++r) --counts[Card{color, r}.type()];
  }
  return counts;
}

std::vector<std::array<double, kNumCardTypes>> v0_belief(const HanabiState& state, int agent) {
  const auto counts = public_remaining_counts(state, agent);
  const auto& know = state.knowledge(agent);
  std::vector<std::array<double, kNumCardTypes>> out(know.size());
  for (std::size_t i = 0; i < know.size(); ++i) {
    double total = 0.0;
    for (int t = 0; t < kNumCardTypes; ++t) {
      const double w = know[i].plausible(Card::from_type(t)) ? counts[t] : 0.0;
      out[i][t] = w;
      total += w;
    }
    if (total > 0.0) {
      for (double& v : out[i]) v /= total;
    }
  }
  return out;
}

CardStatus card_status(const HanabiState& state, const Card& card) {
  const int top = state.fireworks()[card.color];
  if (card.rank == top + 1) return CardStatus::kPlayable;
  if (card.rank <= top) return CardStatus::kDiscardable;
  std::array<int, kNumCardTypes> discarded{};
  for (const auto& c : state.discards()) ++discarded[c.type()];
  for (int r = top + 1; r < card.rank; ++r) {
    if (discarded[Card{card.color, r}.type()] == copies_of_rank(r)) return CardStatus::kDiscardable;
  }
  return CardStatus::kUnknown;
}

std::vector<int> aux_targets(const HanabiState& state, int agent) {
  std::vector<int> out(state.hand_size(), -1);
  const auto& hand = state.hand(agent);
  for (std::size_t i = 0; i < hand.size(); ++i) out[i] = static_cast<int>(card_status(state, hand[i]));
  return out;
}

}  // namespace sad::hanabi
