#pragma once

#include <cstdint>

namespace snq {

/// Deterministic random stream keyed by (seed, stream index).
///
/// Every Monte-Carlo run draws from its own stream derived from the global
/// seed and the run index, so results are bit-identical regardless of how
/// runs are scheduled across threads. The generator is a splitmix64 walk
/// whose start state is a mix of the key; streams are statistically
/// independent for the draw counts used here.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01();

  /// Uniform in [-half_width, +half_width].
  double uniform_pm(double half_width);

  /// Centred normal draw with the given sigma (Box-Muller, cached spare).
  double normal(double sigma);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace snq
