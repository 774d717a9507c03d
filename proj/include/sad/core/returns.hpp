#pragma once

#include <cstddef>
#include <span>

namespace sad {

// Sum_{k >= t} gamma^(k - t) * rewards[k].
double discounted_return(std::span<const double> rewards, double gamma, std::size_t t = 0);

}  // namespace sad
