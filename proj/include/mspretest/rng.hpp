#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mspretest {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// 64-bit FNV-1a, used to turn scenario names into stable stream keys.
std::uint64_t fnv1a64(std::string_view text);

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key and a 64-bit stream index; the
/// remaining 64 counter bits enumerate output blocks. Two streams with the
/// same (key, index) produce bit-identical sequences on every platform, and
/// streams are cheap values that may be copied or moved between threads.
///
/// Normal variates use the trigonometric Box-Muller transform: each pair of
/// uniforms (u1, u2) gives sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2), the
/// sine half being cached for the next call.
class RngStream {
 public:
  RngStream(std::uint64_t key, std::uint64_t stream_index);

  // Substream for replicate `replicate` of the run named `scope` under
  // `master_seed`. The result does not depend on how replicates are
  // scheduled across threads.
  static RngStream derive(std::uint64_t master_seed, std::string_view scope,
                          std::uint64_t replicate);

  std::uint64_t next_u64();
  std::uint32_t next_u32();

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, bound), bound > 0 (Lemire's method). Bounds below
  // 2^32 consume 32 random bits per attempt.
  std::uint64_t below(std::uint64_t bound);

  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_index() const { return stream_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;  // 32-bit words of buffer_ already consumed
  std::optional<double> spare_normal_;
};

}  // namespace mspretest
