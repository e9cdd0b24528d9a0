#pragma once

// Counter-based random numbers: every draw is addressed by (seed, stream, index),
// so simulation order and worker count never change the values produced.

#include <array>
#include <cstdint>

namespace hazode {

// Philox4x32 with 10 rounds (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept;
};

// 53-bit uniform in [0, 1) for the given address.
double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

// Deterministic child seed, e.g. one per Monte Carlo replication.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Sequential view of one stream. Copying a CounterRng forks it at the current position.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  double uniform() noexcept;
  double normal() noexcept;
  std::uint64_t position() const noexcept { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hazode
