#pragma once

#include <span>

namespace sad {

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

// Mean and standard error (sample standard deviation / sqrt(n)); sem is 0
// for fewer than two values.
MeanSem mean_sem(std::span<const double> values);

}  // namespace sad
