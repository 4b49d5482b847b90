#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ffl {

// Deterministic random generator backed by a keyed stream cipher in counter
// mode. Identical seeds give identical draws on every platform, which is what
// makes simulation replays bit-exact. Forking derives an independent child
// stream from a label, so every participant/round/purpose gets its own
// generator without coordination.
class DetRng {
 public:
  explicit DetRng(std::span<const std::uint8_t> seed);
  explicit DetRng(std::uint64_t seed);

  DetRng fork(std::string_view label) const;
  DetRng fork(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller on explicit uniforms (no hidden state).
  double normal();
  void fill(std::span<std::uint8_t> out);
  std::array<std::uint8_t, 32> bytes32();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  DetRng() = default;
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::array<std::uint8_t, 64> buf_{};
  std::size_t pos_ = 64;
  std::uint64_t counter_ = 0;
};

}  // namespace ffl
