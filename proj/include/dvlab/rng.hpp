#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace dvlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure: the same (counter, key) always gives the
/// same four output words.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based random stream.
///
/// The master seed is the Philox key, the stream index occupies the upper
/// 64 bits of the counter and a block counter the lower 64 bits. Distinct
/// stream indices therefore never share a counter value, and any two
/// streams built from the same (seed, index) pair produce the same
/// sequence. A stream is a value: copy it to replay, move it to a worker
/// to consume it.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : seed_(master_seed), stream_(stream_index) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal variate.
  double gaussian() { return normal_(*this); }

  /// Replica r of this stream's family. Replicas of the same parent are
  /// independent of each other and of the parent.
  RngStream replica(std::uint64_t r) const { return {family_key(), r}; }
  /// A child family identified by a tag (e.g. "section probes at k").
  RngStream fork(std::uint64_t tag) const { return {mix64(family_key() ^ mix64(tag + 0x632be59bd9b4e019ull)), 0}; }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

private:
  std::uint64_t family_key() const { return mix64(seed_ ^ mix64(stream_ + 0x9e3779b97f4a7c15ull)); }
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned pos_ = 2;
  std::normal_distribution<double> normal_;
};

} // namespace dvlab
