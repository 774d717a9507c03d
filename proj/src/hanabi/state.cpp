#include "sad/hanabi/state.hpp"

#include <algorithm>
#include <string>

#include "sad/core/error.hpp"
#include "sad/core/rng.hpp"

namespace sad::hanabi {

namespace {

constexpr std::uint64_t kDeckStream = 0x48414e4142ULL;

std::vector<Card> sorted_deck() {
  std::vector<Card> deck;
  deck.reserve(kDeckSize);
  const auto counts = full_deck_counts();
  for (int t = 0; t < kNumCardTypes; ++t) {
    for (int k = 0; k < counts[t]; ++k) deck.push_back(Card::from_type(t));
  }
  return deck;
}

}  // namespace

HanabiState::HanabiState(int players, std::vector<Card> deck, int max_steps)
    : players_(players),
      hand_size_(hand_size_for(players)),
      codec_(players, hand_size_for(players)),
      max_steps_(max_steps),
      deck_(std::move(deck)),
      hands_(players),
      knowledge_(players) {
  if (max_steps < 1) throw DomainError("max_steps must be positive");
  for (int p = 0; p < players_; ++p) {
    for (int i = 0; i < hand_size_; ++i) draw(p);
  }
}

HanabiState HanabiState::new_game(int players, std::uint64_t seed, int max_steps) {
  if (players < 2 || players > 5) throw DomainError("players must lie in [2, 5]");
  auto deck = sorted_deck();
  RngStream rng(seed, kDeckStream);
  shuffle(deck.begin(), deck.end(), rng);
  return HanabiState(players, std::move(deck), max_steps);
}

HanabiState HanabiState::from_deck(int players, const std::vector<Card>& draw_order, int max_steps) {
  if (players < 2 || players > 5) throw DomainError("players must lie in [2, 5]");
  std::array<int, kNumCardTypes> counts{};
  for (const auto& c : draw_order) ++counts[c.type()];
  if (draw_order.size() != kDeckSize || counts != full_deck_counts()) {
    throw DomainError("from_deck needs the full 50-card multiset");
  }
  return HanabiState(players, std::vector<Card>(draw_order.rbegin(), draw_order.rend()), max_steps);
}

void HanabiState::draw(int player) {
  if (deck_.empty()) return;
  hands_[player].push_back(deck_.back());
  knowledge_[player].push_back(CardKnowledge{});
  deck_.pop_back();
}

int HanabiState::fireworks_total() const {
  int total = 0;
  for (int f : fireworks_) total += f;
  return total;
}

int HanabiState::score() const { return life_tokens_ == 0 ? 0 : fireworks_total(); }

bool HanabiState::is_legal(const HanabiMove& m) const { return !terminal_ && rules_allow(m); }

bool HanabiState::rules_allow(const HanabiMove& m) const {
  const auto& hand = hands_[current_player_];
  switch (m.kind) {
    case MoveKind::kPlay:
      return m.card_index >= 0 && m.card_index < static_cast<int>(hand.size());
    case MoveKind::kDiscard:
      return info_tokens_ < kMaxInfoTokens && m.card_index >= 0 &&
             m.card_index < static_cast<int>(hand.size());
    case MoveKind::kHintColor:
    case MoveKind::kHintRank: {
      if (info_tokens_ == 0 || m.target_offset < 1 || m.target_offset >= players_) return false;
      const auto& target = hands_[(current_player_ + m.target_offset) % players_];
      return std::any_of(target.begin(), target.end(), [&](const Card& c) {
        return m.kind == MoveKind::kHintColor ? c.color == m.color : c.rank == m.rank;
      });
    }
  }
  return false;
}

std::vector<bool> HanabiState::legal_moves() const {
  if (terminal_) throw DomainError("legal_moves: game is over");
  std::vector<bool> mask(codec_.num_moves());
  for (int id = 0; id < codec_.num_moves(); ++id) mask[id] = is_legal(codec_.decode(id));
  return mask;
}

std::vector<bool> HanabiState::continuation_moves() const {
  if (terminal_ && !truncated_) throw DomainError("continuation_moves: game is over");
  std::vector<bool> mask(codec_.num_moves());
  for (int id = 0; id < codec_.num_moves(); ++id) mask[id] = rules_allow(codec_.decode(id));
  return mask;
}

MoveOutcome HanabiState::apply_move(const HanabiMove& m) {
  if (terminal_) throw RuleViolation("episode finished");
  if (!is_legal(m)) {
    std::string rule;
    switch (m.kind) {
      case MoveKind::kPlay:
        rule = "play needs an occupied hand slot";
        break;
      case MoveKind::kDiscard:
        rule = info_tokens_ == kMaxInfoTokens ? "cannot discard with 8 information tokens"
                                              : "discard needs an occupied hand slot";
        break;
      default:
        rule = info_tokens_ == 0 ? "hints need an information token"
                                 : "hint must target another player and match a card in their hand";
    }
    throw RuleViolation("illegal move '" + m.str() + "': " + rule);
  }

  const int player = current_player_;
  LastMove last;
  last.player = player;
  last.move = m;
  last.move_id = codec_.encode(m);
  MoveOutcome out;
  const bool deck_was_empty = deck_.empty();

  switch (m.kind) {
    case MoveKind::kPlay:
    case MoveKind::kDiscard: {
      auto& hand = hands_[player];
      auto& know = knowledge_[player];
      const Card card = hand[m.card_index];
      hand.erase(hand.begin() + m.card_index);
      know.erase(know.begin() + m.card_index);
      last.card = card;
      if (m.kind == MoveKind::kDiscard) {
        discards_.push_back(card);
        ++info_tokens_;
      } else if (fireworks_[card.color] + 1 == card.rank) {
        fireworks_[card.color] = card.rank;
        last.success = true;
        out.reward = 1.0;
        if (card.rank == kNumRanks && info_tokens_ < kMaxInfoTokens) {
          ++info_tokens_;
          last.bonus = true;
        }
      } else {
        discards_.push_back(card);
        --life_tokens_;
        if (life_tokens_ == 0) out.reward = -static_cast<double>(fireworks_total());
      }
      draw(player);
      break;
    }
    case MoveKind::kHintColor:
    case MoveKind::kHintRank: {
      const int target = (player + m.target_offset) % players_;
      for (std::size_t i = 0; i < hands_[target].size(); ++i) {
        const Card& c = hands_[target][i];
        if (m.kind == MoveKind::kHintColor) {
          const bool hit = c.color == m.color;
          knowledge_[target][i].apply_color_hint(m.color, hit);
          if (hit) last.revealed |= 1u << i;
        } else {
          const bool hit = c.rank == m.rank;
          knowledge_[target][i].apply_rank_hint(m.rank, hit);
          if (hit) last.revealed |= 1u << i;
        }
      }
      --info_tokens_;
      break;
    }
  }

  last_move_ = last;
  ++steps_;
  if (deck_was_empty) ++turns_after_deck_empty_;
  current_player_ = (current_player_ + 1) % players_;

  if (life_tokens_ == 0 || fireworks_total() == kMaxScore || turns_after_deck_empty_ == players_) {
    terminal_ = true;
  } else if (steps_ >= max_steps_) {
    terminal_ = true;
    truncated_ = true;
  }
  out.done = terminal_;
  out.truncated = truncated_;
  return out;
}

void HanabiState::check_invariants() const {
  std::array<int, kNumCardTypes> counts{};
  for (const auto& c : deck_) ++counts[c.type()];
  for (const auto& h : hands_) {
    for (const auto& c : h) ++counts[c.type()];
  }
  for (const auto& c : discards_) ++counts[c.type()];
  for (int color = 0; color < kNumColors; ++color) {
    if (fireworks_[color] < 0 || fireworks_[color] > kNumRanks) {
      throw InvariantViolation("firework out of range");
    }
    for (int r = 1; r <= fireworks_[color]; ++r) ++counts[Card{color, r}.type()];
  }
  if (counts != full_deck_counts()) throw InvariantViolation("card conservation broken");
  if (info_tokens_ < 0 || info_tokens_ > kMaxInfoTokens) throw InvariantViolation("info tokens out of range");
  if (life_tokens_ < 0 || life_tokens_ > kMaxLifeTokens) throw InvariantViolation("life tokens out of range");
  if (score() > kMaxScore) throw InvariantViolation("score above 25");
  for (int p = 0; p < players_; ++p) {
    if (hands_[p].size() != knowledge_[p].size()) throw InvariantViolation("knowledge/hand size mismatch");
    if (static_cast<int>(hands_[p].size()) > hand_size_) throw InvariantViolation("hand too large");
    for (std::size_t i = 0; i < hands_[p].size(); ++i) {
      const auto& k = knowledge_[p][i];
      const auto& c = hands_[p][i];
      if (!k.plausible(c)) throw InvariantViolation("hint knowledge contradicts the true card");
      if (k.revealed_color >= 0 && k.revealed_color != c.color) throw InvariantViolation("wrong revealed color");
      if (k.revealed_rank >= 0 && k.revealed_rank != c.rank) throw InvariantViolation("wrong revealed rank");
    }
  }
}

void HanabiState::swap_hand_with_deck(int player, int slot, int deck_index) {
  std::swap(hands_.at(player).at(slot), deck_.at(deck_index));
}

}  // namespace sad::hanabi
