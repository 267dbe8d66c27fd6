/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pote/errors.hpp"

namespace pote {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView bytes);
std::optional<Bytes> from_hex(std::string_view hex);

/// Fixed 32-byte digest. Default-constructed value is all zeros.
class Digest32 {
 public:
  static constexpr std::size_t kSize = 32;
  using Array = std::array<std::uint8_t, kSize>;

  constexpr Digest32() = default;
  constexpr explicit Digest32(const Array& bytes) : bytes_(bytes) {}

  /// Throws MalformedEncoding unless `bytes` is exactly 32 bytes long.
  static Digest32 from_span(ByteView bytes);
  static std::optional<Digest32> from_hex(std::string_view hex);

  [[nodiscard]] const Array& bytes() const { return bytes_; }
  [[nodiscard]] Array& mutable_bytes() { return bytes_; }
  [[nodiscard]] ByteView view() const { return {bytes_.data(), bytes_.size()}; }
  [[nodiscard]] std::string to_hex() const { return pote::to_hex(view()); }
  [[nodiscard]] bool is_zero() const;

  /// First eight bytes read as a little-endian integer.
  [[nodiscard]] std::uint64_t prefix_u64_le() const;

  auto operator<=>(const Digest32&) const = default;

 private:
  Array bytes_{};
};

/// One-byte identifier recorded in chain configuration.
enum class HashAlgorithm : std::uint8_t {
  sha256 = 0x01,
  blake2b_256 = 0x02,
};

std::optional<HashAlgorithm> hash_algorithm_from_id(std::uint8_t id);
std::string_view hash_algorithm_name(HashAlgorithm alg);
std::optional<HashAlgorithm> hash_algorithm_from_name(std::string_view name);

Digest32 hash(ByteView bytes, HashAlgorithm alg = HashAlgorithm::sha256);

namespace codec {

inline constexpr std::size_t kMaxQuoteBytes = 8192;
inline constexpr std::size_t kMaxEnclaveSignatureBytes = 96;

// Canonical writer: fixed-width little-endian integers, u32 length prefix on
// variable fields, declaration order, no padding.
class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& raw(ByteView bytes);
  Writer& digest(const Digest32& d) { return raw(d.view()); }
  /// Length-prefixed field; throws VariableFieldTooLong past `max_len`.
  Writer& var(ByteView bytes, std::size_t max_len, std::string_view field);

  [[nodiscard]] const Bytes& bytes() const& { return out_; }
  [[nodiscard]] Bytes take() && { return std::move(out_); }
  [[nodiscard]] std::size_t size() const { return out_.size(); }

 private:
  Bytes out_;
};

// Strict reader: every short read, oversize length prefix, or leftover byte
// raises MalformedEncoding.
class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Digest32 digest();
  ByteView raw(std::size_t n);
  Bytes var(std::size_t max_len, std::string_view field);

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    auto src = raw(N);
    std::copy(src.begin(), src.end(), out.begin());
    return out;
  }

  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }
  [[nodiscard]] std::size_t position() const { return pos_; }
  void finish() const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

template <typename T>
concept Encodable = requires(const T& t, Writer& w) {
  { t.encode_to(w) } -> std::same_as<void>;
};

template <typename T>
concept Decodable = requires(Reader& r) {
  { T::decode_from(r) } -> std::same_as<T>;
};

template <Encodable T>
Bytes encode(const T& obj) {
  Writer w;
  obj.encode_to(w);
  return std::move(w).take();
}

/// Exact inverse of encode; rejects trailing bytes.
template <Decodable T>
T decode(ByteView bytes) {
  Reader r(bytes);
  T out = T::decode_from(r);
  r.finish();
  return out;
}

template <Encodable T>
Digest32 hash_of(const T& obj, HashAlgorithm alg = HashAlgorithm::sha256) {
  auto bytes = encode(obj);
  return hash(bytes, alg);
}

}  // namespace codec
}  // namespace pote
