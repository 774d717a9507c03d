#include "sad/replay/sum_tree.hpp"

#include <bit>
#include <cmath>

#include "sad/core/error.hpp"

namespace sad::replay {

SumTree::SumTree(std::size_t leaves) : leaves_(leaves) {
  if (leaves == 0) throw DomainError("sum tree needs at least one leaf");
  base_ = std::bit_ceil(leaves);
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= leaves_) throw DomainError("sum tree leaf out of range");
  if (!(value >= 0.0) || !std::isfinite(value)) throw DomainError("sum tree values must be finite and >= 0");
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  // Parents are recomputed from children so rounding never accumulates.
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const double left = nodes_[2 * i];
    const double right = nodes_[2 * i + 1];
    if ((mass < left && left > 0.0) || right <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return i - base_;
}

double SumTree::brute_total() const {
  double s = 0.0;
  for (std::size_t i = 0; i < leaves_; ++i) s += nodes_[base_ + i];
  return s;
}

}  // namespace sad::replay
