/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pote/codec.hpp"
#include "pote/crypto.hpp"

// Software model of TEE vendor attestation authorities: a registry of vendor
// roots of trust, quote issuance, and quote verification.
namespace pote::attestation {

/// One-byte vendor identifier; 0 is reserved as invalid.
struct VendorId {
  std::uint8_t value = 0;

  [[nodiscard]] bool valid() const { return value != 0; }
  auto operator<=>(const VendorId&) const = default;
};

enum class VendorStatus : std::uint8_t {
  active = 0,
  revoked = 1,
  compromised = 2,
};

std::string_view to_string(VendorStatus status);
std::optional<VendorStatus> vendor_status_from_string(std::string_view s);

struct VendorEntry {
  VendorId id;
  crypto::PublicKey public_key;
  VendorStatus status = VendorStatus::active;
};

struct StatusChange {
  VendorId id;
  VendorStatus from;
  VendorStatus to;
};

class VendorRegistry {
 public:
  static constexpr std::size_t kMaxVendors = 255;

  VendorRegistry(std::uint64_t chain_id, const Digest32& canonical_measurement,
                 std::uint32_t diversity_threshold_k,
                 HashAlgorithm hash_algorithm = HashAlgorithm::sha256);

  /// Assigns ids sequentially from 1. Throws RegistryFull after 255 vendors.
  VendorId register_vendor(const crypto::PublicKey& public_key);

  /// Throws UnknownVendor. Every change is appended to history().
  void set_vendor_status(VendorId id, VendorStatus status);

  [[nodiscard]] const VendorEntry* find(VendorId id) const;
  [[nodiscard]] const std::vector<VendorEntry>& vendors() const { return vendors_; }
  [[nodiscard]] const std::vector<StatusChange>& history() const { return history_; }

  /// Vendors not revoked. Compromise is covert, so compromised vendors still
  /// count as active from the registry's point of view.
  [[nodiscard]] std::size_t active_count() const;

  [[nodiscard]] std::uint64_t chain_id() const { return chain_id_; }
  [[nodiscard]] const Digest32& canonical_measurement() const { return canonical_measurement_; }
  [[nodiscard]] std::uint32_t diversity_threshold() const { return k_; }
  [[nodiscard]] HashAlgorithm hash_algorithm() const { return hash_algorithm_; }

  /// Bumped on every mutation; lets verification caches detect staleness.
  [[nodiscard]] std::uint64_t epoch() const { return epoch_; }

  /// Throws ConfigInvalid naming the first violated invariant
  /// (k >= 1, k <= active vendors, nonzero measurement).
  void validate() const;

 private:
  std::uint64_t chain_id_;
  Digest32 canonical_measurement_;
  std::uint32_t k_;
  HashAlgorithm hash_algorithm_;
  std::vector<VendorEntry> vendors_;
  std::vector<StatusChange> history_;
  std::uint64_t epoch_ = 0;
};

struct QuoteUserData {
  crypto::PublicKey pk_block;
  Digest32 commitment;
  std::uint64_t height = 0;
  std::uint64_t chain_id = 0;
  Digest32 nonce;

  void encode_to(codec::Writer& w) const;
  static QuoteUserData decode_from(codec::Reader& r);
  auto operator<=>(const QuoteUserData&) const = default;
};

struct AttestationQuote {
  VendorId vendor_id;
  Digest32 measurement;
  QuoteUserData user_data;
  crypto::Signature vendor_signature;

  /// Bytes covered by vendor_signature: measurement ∥ user_data ∥ vendor_id.
  [[nodiscard]] Bytes signed_payload() const;

  void encode_to(codec::Writer& w) const;
  static AttestationQuote decode_from(codec::Reader& r);
  auto operator<=>(const AttestationQuote&) const = default;
};

/// Encoded size of every well-formed quote (Ed25519 signature).
inline constexpr std::size_t kQuoteEncodedSize = 1 + 32 + 32 + 32 + 8 + 8 + 32 + 4 + 64;

struct VendorAuthority {
  VendorId id;
  crypto::KeyPair key;
  Digest32 canonical_measurement;
  /// A compromised authority signs whatever it is asked to.
  bool compromised = false;
};

/// Throws MeasurementRejected when an honest authority is asked to attest a
/// measurement other than the canonical one.
AttestationQuote issue_quote(const VendorAuthority& authority, const Digest32& measurement,
                             const QuoteUserData& user_data);

enum class VerifyOutcome : std::uint8_t {
  ok,
  unknown_vendor,
  revoked_vendor,
  bad_signature,
  wrong_measurement,
};

std::string_view to_string(VerifyOutcome outcome);

/// Checks run in order (vendor registered, not revoked, signature, measurement)
/// and the first failure is returned.
VerifyOutcome verify_quote(const VendorRegistry& registry, const AttestationQuote& quote);

// Memoizes verify_quote by encoded quote bytes. Cleared automatically when the
// registry epoch changes. Single-threaded use only.
class QuoteVerifyCache {
 public:
  VerifyOutcome verify(const VendorRegistry& registry, const AttestationQuote& quote);

  [[nodiscard]] std::uint64_t hits() const { return hits_; }
  [[nodiscard]] std::uint64_t misses() const { return misses_; }

 private:
  const VendorRegistry* registry_ = nullptr;
  std::uint64_t epoch_ = 0;
  std::unordered_map<std::string, VerifyOutcome> memo_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct EnclaveIdentity {
  VendorId vendor_id;
  std::uint32_t enclave_index = 0;
  crypto::KeyPair block_keypair;
};

}  // namespace pote::attestation
