#pragma once

#include <cstddef>
#include <vector>

namespace sad::replay {

// Binary sum tree over a fixed number of non-negative leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t leaves);

  std::size_t size() const { return leaves_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative range contains `mass` in [0, total()). Never
  // returns a zero-valued leaf while total() > 0.
  std::size_t find(double mass) const;
  // Sum of leaves recomputed from scratch, for consistency checks.
  double brute_total() const;

 private:
  std::size_t leaves_;
  std::size_t base_;
  std::vector<double> nodes_;
};

}  // namespace sad::replay
