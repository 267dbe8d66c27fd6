/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "pote/codec.hpp"

// Ed25519 keys and signatures (RFC 8032). Keys are derived from 32-byte seeds
// so that every identity in a simulation is reproducible.
namespace pote::crypto {

inline constexpr std::size_t kSeedSize = 32;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSecretKeySize = 64;
inline constexpr std::size_t kSignatureSize = 64;

using Seed = std::array<std::uint8_t, kSeedSize>;

struct PublicKey {
  std::array<std::uint8_t, kPublicKeySize> bytes{};

  [[nodiscard]] ByteView view() const { return {bytes.data(), bytes.size()}; }
  [[nodiscard]] std::string to_hex() const { return pote::to_hex(view()); }
  static PublicKey from_span(ByteView b);

  auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
  std::array<std::uint8_t, kSignatureSize> bytes{};

  [[nodiscard]] ByteView view() const { return {bytes.data(), bytes.size()}; }
  static Signature from_span(ByteView b);

  auto operator<=>(const Signature&) const = default;
};

class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(const std::array<std::uint8_t, kSecretKeySize>& bytes) : bytes_(bytes) {}

  [[nodiscard]] ByteView view() const { return {bytes_.data(), bytes_.size()}; }

  bool operator==(const SecretKey&) const = default;

 private:
  std::array<std::uint8_t, kSecretKeySize> bytes_{};
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;

  bool operator==(const KeyPair&) const = default;
};

KeyPair keygen(const Seed& seed);

/// Deterministic Ed25519 signature. Throws std::invalid_argument on an empty
/// message.
Signature sign(const SecretKey& secret, ByteView message);

/// Never throws; malformed keys or signatures simply fail to verify.
bool verify(const PublicKey& public_key, ByteView message, ByteView signature);
bool verify(const PublicKey& public_key, ByteView message, const Signature& signature);

/// seed = SHA-256(domain ∥ material). Used to derive per-identity seeds from a
/// run's master seed.
Seed derive_key_seed(std::string_view domain, ByteView material);

}  // namespace pote::crypto
