#include "sad/matrix_game/solver.hpp"

#include <array>

namespace sad::matrix_game {

namespace {

constexpr int kP1Policies = kNumActions * kNumActions;  // card -> action
constexpr int kP2Policies = 729;                        // (a1, c2) -> action, 3^6

int digit(int code, int position) {
  for (int i = 0; i < position; ++i) code /= kNumActions;
  return code % kNumActions;
}

}  // namespace

SolveResult solve_exhaustive(const PayoffTensor& tensor) {
  SolveResult result;
  bool first = true;
  bool first_noncomm = true;
  for (int p1 = 0; p1 < kP1Policies; ++p1) {
    const std::array<int, kNumCards> a1_of{digit(p1, 0), digit(p1, 1)};
    const bool card_independent = a1_of[0] == a1_of[1];
    for (int p2 = 0; p2 < kP2Policies; ++p2) {
      double value = 0.0;
      for (int c1 = 0; c1 < kNumCards; ++c1) {
        for (int c2 = 0; c2 < kNumCards; ++c2) {
          const int a1 = a1_of[c1];
          const int a2 = digit(p2, a1 * kNumCards + c2);
          value += tensor.at(c1, c2, a1, a2);
        }
      }
      value /= kNumCards * kNumCards;
      if (first || value > result.best_value) {
        result.best_value = value;
        result.optimal_policy_count = 1;
        first = false;
      } else if (value == result.best_value) {
        ++result.optimal_policy_count;
      }
      if (card_independent && (first_noncomm || value > result.best_noncomm_value)) {
        result.best_noncomm_value = value;
        first_noncomm = false;
      }
    }
  }
  return result;
}

}  // namespace sad::matrix_game
