#include "sad/core/returns.hpp"

#include <cmath>
#include <string>

#include "sad/core/error.hpp"

namespace sad {

double discounted_return(std::span<const double> rewards, double gamma, std::size_t t) {
  if (rewards.empty()) throw DomainError("discounted_return: empty reward list");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("discounted_return: gamma must lie in (0, 1], got " + std::to_string(gamma));
  }
  if (t >= rewards.size()) throw DomainError("discounted_return: start index past end");
  // Horner from the back so each reward is scaled by exactly gamma^(k - t).
  double value = 0.0;
  for (std::size_t k = rewards.size(); k-- > t;) {
    if (!std::isfinite(rewards[k])) throw DomainError("discounted_return: non-finite reward");
    value = rewards[k] + gamma * value;
  }
  return value;
}

}  // namespace sad
