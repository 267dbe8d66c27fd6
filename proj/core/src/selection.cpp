/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/selection.hpp"

#include <algorithm>

namespace pote::selection {

RoundSeed derive_seed(const Digest32& parent_block_hash, std::uint64_t height, HashAlgorithm alg) {
  static constexpr std::string_view kTag = "POTE_SEED_V1";
  codec::Writer w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kTag.data()), kTag.size()));
  w.digest(parent_block_hash).u64(height);
  return {hash(w.bytes(), alg), height};
}

EnclaveRoster EnclaveRoster::build(const attestation::VendorRegistry& registry,
                                   const std::vector<EnclaveRef>& enclaves) {
  EnclaveRoster roster;
  for (const auto& e : enclaves) {
    const auto* entry = registry.find(e.vendor_id);
    if (entry == nullptr || entry->status == attestation::VendorStatus::revoked) continue;
    roster.by_vendor_[e.vendor_id].push_back(e);
  }
  for (auto& [v, list] : roster.by_vendor_) {
    std::sort(list.begin(), list.end(), [](const EnclaveRef& a, const EnclaveRef& b) {
      return a.enclave_index < b.enclave_index;
    });
  }
  return roster;
}

std::vector<attestation::VendorId> EnclaveRoster::eligible_vendors() const {
  std::vector<attestation::VendorId> out;
  for (const auto& [v, list] : by_vendor_) {
    if (!list.empty()) out.push_back(v);
  }
  return out;
}

const std::vector<EnclaveRef>& EnclaveRoster::enclaves_of(attestation::VendorId v) const {
  static const std::vector<EnclaveRef> kEmpty;
  auto it = by_vendor_.find(v);
  return it == by_vendor_.end() ? kEmpty : it->second;
}

std::size_t EnclaveRoster::size() const {
  std::size_t n = 0;
  for (const auto& [v, list] : by_vendor_) n += list.size();
  return n;
}

attestation::VendorId sample_vendor(const RoundSeed& seed, const EnclaveRoster& roster) {
  auto eligible = roster.eligible_vendors();
  if (eligible.empty()) throw EmptyRoster("no eligible vendor in roster");
  return eligible[seed.value.prefix_u64_le() % eligible.size()];
}

EnclaveRef select_proposer(const RoundSeed& seed, const EnclaveRoster& roster, HashAlgorithm alg) {
  const attestation::VendorId v = sample_vendor(seed, roster);
  codec::Writer w;
  w.digest(seed.value).u8(v.value);
  const std::uint64_t draw = hash(w.bytes(), alg).prefix_u64_le();
  const auto& list = roster.enclaves_of(v);
  return list[draw % list.size()];
}

}  // namespace pote::selection
