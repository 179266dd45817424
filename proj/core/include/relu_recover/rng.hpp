#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace relu_recover {

/// Seeded random stream: xoshiro256** state expanded from the seed by
/// splitmix64, Gaussian draws by the Box-Muller transform (both outputs of a
/// pair are used, cosine branch first). The generator and transform are
/// frozen so that experiment outputs replay bit-identically.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double gaussian() noexcept;

  /// Independent child stream keyed by `index`; does not advance this stream.
  RngStream derive(std::uint64_t index) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::uint64_t state_[4];
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Order-sensitive mix of a label and integer keys into one seed.
std::uint64_t mix_seed(std::uint64_t master, std::string_view label,
                       std::initializer_list<std::uint64_t> keys) noexcept;

}  // namespace relu_recover
