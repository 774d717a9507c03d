#include "sad/core/stats.hpp"

#include <cmath>

#include "sad/core/error.hpp"

namespace sad {

MeanSem mean_sem(std::span<const double> values) {
  if (values.empty()) throw DomainError("mean_sem: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanSem out;
  out.mean = sum / n;
  if (values.size() < 2) return out;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.sem = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace sad
