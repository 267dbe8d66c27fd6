/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string_view>

namespace pote {

// SplitMix64 (Steele, Lea, Flood 2014). Counter-based, so any language with
// 64-bit wrapping arithmetic reproduces the same stream from the same seed.
class SplitMix64 {
 public:
  static constexpr std::string_view kName = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next();

  /// Uniform in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit();

  /// Independent stream derived from the construction seed and a label;
  /// unaffected by how far this generator has advanced.
  [[nodiscard]] SplitMix64 fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace pote
