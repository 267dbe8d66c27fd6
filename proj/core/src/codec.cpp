/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/codec.hpp"

#include <sodium.h>

#include <algorithm>
#include <limits>

namespace pote {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) {
    throw Error("libsodium initialisation failed");
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest32 Digest32::from_span(ByteView bytes) {
  if (bytes.size() != kSize) {
    throw MalformedEncoding("digest must be 32 bytes, got " + std::to_string(bytes.size()));
  }
  Array a{};
  std::copy(bytes.begin(), bytes.end(), a.begin());
  return Digest32(a);
}

std::optional<Digest32> Digest32::from_hex(std::string_view hex) {
  auto raw = pote::from_hex(hex);
  if (!raw || raw->size() != kSize) return std::nullopt;
  return from_span(*raw);
}

bool Digest32::is_zero() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
}

std::uint64_t Digest32::prefix_u64_le() const {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | bytes_[static_cast<std::size_t>(i)];
  }
  return v;
}

std::optional<HashAlgorithm> hash_algorithm_from_id(std::uint8_t id) {
  switch (id) {
    case 0x01:
      return HashAlgorithm::sha256;
    case 0x02:
      return HashAlgorithm::blake2b_256;
    default:
      return std::nullopt;
  }
}

std::string_view hash_algorithm_name(HashAlgorithm alg) {
  switch (alg) {
    case HashAlgorithm::sha256:
      return "sha256";
    case HashAlgorithm::blake2b_256:
      return "blake2b-256";
  }
  return "unknown";
}

std::optional<HashAlgorithm> hash_algorithm_from_name(std::string_view name) {
  if (name == "sha256") return HashAlgorithm::sha256;
  if (name == "blake2b-256") return HashAlgorithm::blake2b_256;
  return std::nullopt;
}

Digest32 hash(ByteView bytes, HashAlgorithm alg) {
  ensure_sodium();
  Digest32::Array out{};
  switch (alg) {
    case HashAlgorithm::sha256:
      crypto_hash_sha256(out.data(), bytes.data(), bytes.size());
      break;
    case HashAlgorithm::blake2b_256:
      crypto_generichash(out.data(), out.size(), bytes.data(), bytes.size(), nullptr, 0);
      break;
  }
  return Digest32(out);
}

namespace codec {

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Writer& Writer::raw(ByteView bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
  return *this;
}

Writer& Writer::var(ByteView bytes, std::size_t max_len, std::string_view field) {
  if (bytes.size() > max_len) {
    throw VariableFieldTooLong(std::string(field) + " is " + std::to_string(bytes.size()) +
                               " bytes, maximum " + std::to_string(max_len));
  }
  u32(static_cast<std::uint32_t>(bytes.size()));
  return raw(bytes);
}

ByteView Reader::raw(std::size_t n) {
  if (n > remaining()) {
    throw MalformedEncoding("truncated input: need " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Reader::u8() { return raw(1)[0]; }

std::uint32_t Reader::u32() {
  auto b = raw(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

std::uint64_t Reader::u64() {
  auto b = raw(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

Digest32 Reader::digest() { return Digest32::from_span(raw(Digest32::kSize)); }

Bytes Reader::var(std::size_t max_len, std::string_view field) {
  const std::size_t at = pos_;
  const std::uint32_t len = u32();
  if (len > max_len) {
    throw MalformedEncoding(std::string(field) + " length prefix " + std::to_string(len) +
                            " at offset " + std::to_string(at) + " exceeds maximum " +
                            std::to_string(max_len));
  }
  auto b = raw(len);
  return Bytes(b.begin(), b.end());
}

void Reader::finish() const {
  if (remaining() != 0) {
    throw MalformedEncoding(std::to_string(remaining()) + " trailing bytes after offset " +
                            std::to_string(pos_));
  }
}

}  // namespace codec
}  // namespace pote
