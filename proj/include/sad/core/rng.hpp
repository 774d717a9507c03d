#pragma once

#include <cstdint>
#include <limits>
#include <utility>

namespace sad {

// Counter-based random stream. Every draw is a pure function of
// (seed, stream id, counter), so identical (seed, stream) pairs reproduce the
// same sequence on every platform, and split() hands out independent streams
// without sharing state.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  // A child stream keyed on this stream's seed and a derived stream id.
  // Does not advance this stream.
  RngStream split(std::uint64_t child) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

// Fisher-Yates using the stream's own integer draws (std::shuffle is not
// reproducible across standard library implementations).
template <typename It>
void shuffle(It first, It last, RngStream& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.uniform_int(i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace sad
