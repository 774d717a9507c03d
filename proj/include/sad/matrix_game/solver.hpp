#pragma once

#include "sad/matrix_game/payoff.hpp"

namespace sad::matrix_game {

struct SolveResult {
  double best_value = 0.0;
  // Best value when P1 ignores its card (no information can flow to P2).
  double best_noncomm_value = 0.0;
  // Deterministic joint policies achieving best_value.
  long optimal_policy_count = 0;
};

// Enumerates all 3^2 P1 policies (card -> action) against all 3^6 P2 policies
// ((P1 action, own card) -> action) under uniform iid cards.
SolveResult solve_exhaustive(const PayoffTensor& tensor);

}  // namespace sad::matrix_game
