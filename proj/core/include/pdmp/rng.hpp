#pragma once

#include <cstdint>
#include <limits>

namespace pdmp {

// Counter-based generator: output k is a keyed hash of k, so streams can be
// split off deterministically without sharing state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() : CounterRng(0) {}
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  // Standard exponential variate.
  double exponential() noexcept;

  CounterRng split(std::uint64_t stream_id) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t tweak_;
  std::uint64_t counter_;
};

// Derives independent streams from a single master seed.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) noexcept : master_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_; }
  std::uint64_t derived_seed(std::uint64_t stream_id) const noexcept;
  CounterRng stream(std::uint64_t stream_id) const noexcept;

 private:
  std::uint64_t master_;
};

namespace streams {
inline constexpr std::uint64_t main_chain = 1;
inline constexpr std::uint64_t validation_chain = 2;

// Replicate r uses a pair of streams disjoint from the single-run ones.
constexpr std::uint64_t replicate_main(std::uint64_t r) noexcept { return 1000 + 2 * r; }
constexpr std::uint64_t replicate_validation(std::uint64_t r) noexcept { return 1001 + 2 * r; }
}  // namespace streams

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace pdmp
