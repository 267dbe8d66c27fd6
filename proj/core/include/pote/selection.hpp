/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pote/attestation.hpp"
#include "pote/codec.hpp"
#include "pote/crypto.hpp"

// Proposer election from a hash-chain seed: sample a vendor class uniformly,
// then an enclave uniformly within it.
namespace pote::selection {

struct RoundSeed {
  Digest32 value;
  std::uint64_t height = 0;

  auto operator<=>(const RoundSeed&) const = default;
};

/// value = H("POTE_SEED_V1" ∥ parent_block_hash ∥ height LE8).
RoundSeed derive_seed(const Digest32& parent_block_hash, std::uint64_t height,
                      HashAlgorithm alg = HashAlgorithm::sha256);

/// Public part of an EnclaveIdentity, enough to recognise the elected proposer.
struct EnclaveRef {
  attestation::VendorId vendor_id;
  std::uint32_t enclave_index = 0;
  crypto::PublicKey pk_block;

  static EnclaveRef of(const attestation::EnclaveIdentity& e) {
    return {e.vendor_id, e.enclave_index, e.block_keypair.public_key};
  }
  auto operator<=>(const EnclaveRef&) const = default;
};

class EnclaveRoster {
 public:
  EnclaveRoster() = default;

  /// Enclaves of revoked or unregistered vendors are dropped. Within a vendor
  /// the list is ordered by enclave_index.
  static EnclaveRoster build(const attestation::VendorRegistry& registry,
                             const std::vector<EnclaveRef>& enclaves);

  /// Vendors with a nonempty list, ascending by id.
  [[nodiscard]] std::vector<attestation::VendorId> eligible_vendors() const;
  [[nodiscard]] const std::vector<EnclaveRef>& enclaves_of(attestation::VendorId v) const;
  [[nodiscard]] std::size_t size() const;

 private:
  std::map<attestation::VendorId, std::vector<EnclaveRef>> by_vendor_;
};

/// Throws EmptyRoster when no vendor is eligible.
attestation::VendorId sample_vendor(const RoundSeed& seed, const EnclaveRoster& roster);

/// w = H(seed.value ∥ v) prefix u64 LE; proposer = enclaves_of(v)[w mod len].
EnclaveRef select_proposer(const RoundSeed& seed, const EnclaveRoster& roster,
                           HashAlgorithm alg = HashAlgorithm::sha256);

}  // namespace pote::selection
