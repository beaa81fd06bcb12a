#pragma once

#include <cstdint>
#include <string_view>

namespace quadtomo {

/// Counter-based random generator.
///
/// The i-th output is a pure function of (seed, stream, i), so a generator can
/// be repositioned with skip_to() and chunks of a sequence can be produced on
/// different threads without changing a single bit of the result. Streams are
/// decorrelated by hashing the stream id into the key; use stream_id() to
/// derive one from a label.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  /// FNV-1a hash of a label, for naming streams.
  static std::uint64_t stream_id(std::string_view name) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1), 53-bit resolution. Consumes one counter value.
  double next_uniform() noexcept;

  /// Standard normal draw (Box-Muller). Always consumes exactly two counter
  /// values, which keeps sample positions addressable for chunked generation.
  double next_normal() noexcept;

  void skip_to(std::uint64_t counter) noexcept { counter_ = counter; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace quadtomo
