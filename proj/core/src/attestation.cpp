/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/attestation.hpp"

#include <algorithm>

namespace pote::attestation {

std::string_view to_string(VendorStatus status) {
  switch (status) {
    case VendorStatus::active: return "active";
    case VendorStatus::revoked: return "revoked";
    case VendorStatus::compromised: return "compromised";
  }
  return "unknown";
}

std::optional<VendorStatus> vendor_status_from_string(std::string_view s) {
  if (s == "active") return VendorStatus::active;
  if (s == "revoked") return VendorStatus::revoked;
  if (s == "compromised") return VendorStatus::compromised;
  return std::nullopt;
}

VendorRegistry::VendorRegistry(std::uint64_t chain_id, const Digest32& canonical_measurement,
                               std::uint32_t diversity_threshold_k, HashAlgorithm hash_algorithm)
    : chain_id_(chain_id),
      canonical_measurement_(canonical_measurement),
      k_(diversity_threshold_k),
      hash_algorithm_(hash_algorithm) {}

VendorId VendorRegistry::register_vendor(const crypto::PublicKey& public_key) {
  if (vendors_.size() >= kMaxVendors) {
    throw RegistryFull("vendor registry holds the maximum of 255 vendors");
  }
  VendorId id{static_cast<std::uint8_t>(vendors_.size() + 1)};
  vendors_.push_back({id, public_key, VendorStatus::active});
  ++epoch_;
  return id;
}

void VendorRegistry::set_vendor_status(VendorId id, VendorStatus status) {
  auto it = std::find_if(vendors_.begin(), vendors_.end(),
                         [&](const VendorEntry& e) { return e.id == id; });
  if (it == vendors_.end()) {
    throw UnknownVendor("vendor " + std::to_string(id.value) + " is not registered");
  }
  history_.push_back({id, it->status, status});
  it->status = status;
  ++epoch_;
}

const VendorEntry* VendorRegistry::find(VendorId id) const {
  // ids are dense from 1
  if (!id.valid() || id.value > vendors_.size()) return nullptr;
  return &vendors_[id.value - 1];
}

std::size_t VendorRegistry::active_count() const {
  return static_cast<std::size_t>(std::count_if(vendors_.begin(), vendors_.end(), [](const auto& e) {
    return e.status != VendorStatus::revoked;
  }));
}

void VendorRegistry::validate() const {
  if (k_ < 1) throw ConfigInvalid("diversity threshold k must be at least 1");
  if (k_ > active_count()) {
    throw ConfigInvalid("diversity threshold k=" + std::to_string(k_) + " exceeds active vendors (" +
                        std::to_string(active_count()) + ")");
  }
  if (canonical_measurement_.is_zero()) throw ConfigInvalid("canonical measurement is unset");
}

void QuoteUserData::encode_to(codec::Writer& w) const {
  w.raw(pk_block.view()).digest(commitment).u64(height).u64(chain_id).digest(nonce);
}

QuoteUserData QuoteUserData::decode_from(codec::Reader& r) {
  QuoteUserData d;
  d.pk_block.bytes = r.fixed<crypto::kPublicKeySize>();
  d.commitment = r.digest();
  d.height = r.u64();
  d.chain_id = r.u64();
  d.nonce = r.digest();
  return d;
}

Bytes AttestationQuote::signed_payload() const {
  codec::Writer w;
  w.digest(measurement);
  user_data.encode_to(w);
  w.u8(vendor_id.value);
  return std::move(w).take();
}

void AttestationQuote::encode_to(codec::Writer& w) const {
  w.u8(vendor_id.value).digest(measurement);
  user_data.encode_to(w);
  w.var(vendor_signature.view(), crypto::kSignatureSize, "vendor_signature");
}

AttestationQuote AttestationQuote::decode_from(codec::Reader& r) {
  AttestationQuote q;
  q.vendor_id = VendorId{r.u8()};
  q.measurement = r.digest();
  q.user_data = QuoteUserData::decode_from(r);
  auto sig = r.var(crypto::kSignatureSize, "vendor_signature");
  q.vendor_signature = crypto::Signature::from_span(sig);
  return q;
}

AttestationQuote issue_quote(const VendorAuthority& authority, const Digest32& measurement,
                             const QuoteUserData& user_data) {
  if (!authority.compromised && measurement != authority.canonical_measurement) {
    throw MeasurementRejected("vendor " + std::to_string(authority.id.value) +
                              " refuses to attest measurement " + measurement.to_hex());
  }
  AttestationQuote q;
  q.vendor_id = authority.id;
  q.measurement = measurement;
  q.user_data = user_data;
  q.vendor_signature = crypto::sign(authority.key.secret_key, q.signed_payload());
  return q;
}

std::string_view to_string(VerifyOutcome outcome) {
  switch (outcome) {
    case VerifyOutcome::ok: return "ok";
    case VerifyOutcome::unknown_vendor: return "unknown_vendor";
    case VerifyOutcome::revoked_vendor: return "revoked_vendor";
    case VerifyOutcome::bad_signature: return "bad_signature";
    case VerifyOutcome::wrong_measurement: return "wrong_measurement";
  }
  return "unknown";
}

VerifyOutcome verify_quote(const VendorRegistry& registry, const AttestationQuote& quote) {
  const VendorEntry* entry = registry.find(quote.vendor_id);
  if (entry == nullptr) return VerifyOutcome::unknown_vendor;
  if (entry->status == VendorStatus::revoked) return VerifyOutcome::revoked_vendor;
  if (!crypto::verify(entry->public_key, quote.signed_payload(), quote.vendor_signature)) {
    return VerifyOutcome::bad_signature;
  }
  if (quote.measurement != registry.canonical_measurement()) {
    return VerifyOutcome::wrong_measurement;
  }
  return VerifyOutcome::ok;
}

VerifyOutcome QuoteVerifyCache::verify(const VendorRegistry& registry,
                                       const AttestationQuote& quote) {
  if (registry_ != &registry || epoch_ != registry.epoch()) {
    memo_.clear();
    registry_ = &registry;
    epoch_ = registry.epoch();
  }
  auto enc = codec::encode(quote);
  std::string key(enc.begin(), enc.end());
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  auto outcome = verify_quote(registry, quote);
  memo_.emplace(std::move(key), outcome);
  return outcome;
}

}  // namespace pote::attestation
