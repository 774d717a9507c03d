#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace sad::matrix_game {

inline constexpr int kNumCards = 2;
inline constexpr int kNumActions = 3;

// Payoff of the two-step communication game, indexed [c1][c2][a1][a2].
// Indices are zero-based: card 0 is the first card type, action 1 is the
// "safe" middle action that pays 8 for every deal under the default tensor.
class PayoffTensor {
 public:
  PayoffTensor() { values_.fill(0.0); }

  double& at(int c1, int c2, int a1, int a2) { return values_[index(c1, c2, a1, a2)]; }
  double at(int c1, int c2, int a1, int a2) const { return values_[index(c1, c2, a1, a2)]; }

  const std::array<double, 36>& raw() const { return values_; }

  friend bool operator==(const PayoffTensor&, const PayoffTensor&) = default;

 private:
  static int index(int c1, int c2, int a1, int a2) {
    return ((c1 * kNumCards + c2) * kNumActions + a1) * kNumActions + a2;
  }
  std::array<double, 36> values_;
};

inline constexpr int kSafeAction = 1;

// Shipped default: the safe action pays 8 when both take it and 4 when only
// P1 does; after a signalling action (0 or 2) P2 earns 10 by answering 0 when
// the cards match and 2 when they differ, and 0 otherwise.
PayoffTensor default_payoff();

// Names of every structural constraint the tensor breaks; empty when valid.
std::vector<std::string> invariant_failures(const PayoffTensor& tensor);

// Expected payoff of the card-independent 3x3 game, [a1][a2].
std::array<std::array<double, kNumActions>, kNumActions> expected_action_payoff(
    const PayoffTensor& tensor);

// Text format: four blocks of 3x3 reals (row a1, column a2), blocks ordered
// (c1,c2) = (1,1), (1,2), (2,1), (2,2). '#' starts a comment.
PayoffTensor parse_payoff(const std::string& text);
PayoffTensor load_payoff(const std::filesystem::path& path);
std::string format_payoff(const PayoffTensor& tensor);
void save_payoff(const PayoffTensor& tensor, const std::filesystem::path& path);

}  // namespace sad::matrix_game
