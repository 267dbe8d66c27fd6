/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pote/attestation.hpp"
#include "pote/chain.hpp"
#include "pote/selection.hpp"
#include "pote/validation.hpp"

namespace pote::sim {

struct Partition {
  std::vector<std::uint32_t> from;
  std::vector<std::uint32_t> to;
  double start_ms = 0;
  double end_ms = 0;

  bool operator==(const Partition&) const = default;
};

// Every duration is in (possibly fractional) milliseconds.
struct DelayModel {
  double base_latency_ms = 0;
  /// Link delay is uniform in [base - jitter, base + jitter], clamped at 0.
  /// Each directed link delivers in send order, like a TCP stream.
  double jitter_ms = 0;
  double drop_probability = 0;
  std::vector<Partition> partitions;
  /// Latency from quote request to quote delivery, overlapping across requests.
  double attestation_issue_ms = 0;
  /// Work a vendor's quoting host spends per request. Requests in service
  /// share the host equally, so each one slows as concurrent load grows.
  double attestation_service_ms = 0;
  double quote_verify_ms = 0;
  double exec_ms_per_100tx = 0;
  /// Place every validator of a vendor on one host (one host per vendor
  /// class). Messages between co-located validators take local_latency_ms;
  /// jitter and drops apply only between hosts.
  bool colocate_by_vendor = false;
  double local_latency_ms = 0;

  bool operator==(const DelayModel&) const = default;
};

enum class AdversaryMode : std::uint8_t {
  none,
  tamper_after_attest,
  keep_quote_alter_block,
  replay_old_quote,
  rogue_proposer,
};

std::string_view to_string(AdversaryMode mode);
std::optional<AdversaryMode> adversary_mode_from_string(std::string_view s);

struct AdversarySpec {
  AdversaryMode mode = AdversaryMode::none;
  std::vector<std::uint8_t> compromised_vendors;
  /// Inclusive range of round numbers (1-based) in which the adversary acts.
  std::uint64_t from_round = 1;
  std::uint64_t to_round = UINT64_MAX;

  [[nodiscard]] bool active(std::uint64_t round) const {
    return round >= from_round && round <= to_round;
  }
  [[nodiscard]] std::size_t f() const { return compromised_vendors.size(); }
  bool operator==(const AdversarySpec&) const = default;
};

enum class Protocol : std::uint8_t { pote, slotted };

struct SlottedConfig {
  double slot_interval_ms = 12000;
  /// Votes needed, as a fraction of all validators (rounded up).
  double vote_fraction = 2.0 / 3.0;

  bool operator==(const SlottedConfig&) const = default;
};

struct NetworkConfig {
  std::uint32_t validators = 0;
  std::uint32_t vendors = 0;
  std::vector<std::uint32_t> enclaves_per_vendor;
  std::uint32_t k = 0;

  bool operator==(const NetworkConfig&) const = default;
};

struct LedgerConfig {
  std::uint64_t chain_id = 1;
  HashAlgorithm hash_algorithm = HashAlgorithm::sha256;
  std::uint32_t accounts = 0;
  std::uint64_t initial_balance = 0;

  bool operator==(const LedgerConfig&) const = default;
};

struct Scenario {
  std::string name;
  NetworkConfig network;
  LedgerConfig ledger;
  std::uint64_t rounds = 0;
  std::uint32_t tx_per_block = 0;
  DelayModel delay;
  AdversarySpec adversary;
  std::uint64_t seed = 0;
  std::string prng = "splitmix64";
  double round_timeout_ms = 0;
  validation::FinalizeMode finalize_mode = validation::FinalizeMode::replay;
  Protocol protocol = Protocol::pote;
  SlottedConfig slotted;

  bool operator==(const Scenario&) const = default;
};

/// Parses a scenario document (JSON). Every field is required except
/// `adversary`, `slotted` (required when protocol is "slotted") and the
/// co-location fields of `delay`.
/// Unknown keys are rejected. Throws ConfigInvalid naming the offending field.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);

/// Throws ConfigInvalid naming the first violated constraint.
void validate_scenario(const Scenario& s);

/// Enclave counts for `validators` spread round-robin over `vendors`.
std::vector<std::uint32_t> round_robin_enclaves(std::uint32_t validators, std::uint32_t vendors);

/// A scenario with the calibrated latency model: 3 vendors, k = 3, 1000 tx per
/// block, exec 20 ms per block, attestation 25 ms plus 1 ms of shared quoting
/// work, link 10 ± 5 ms between hosts, validators co-located per vendor.
Scenario calibrated_latency_scenario(std::uint32_t validators, std::uint64_t rounds);

// Every identity, key and initial object of a run, derived deterministically
// from the scenario and seed.
struct World {
  Digest32 master_seed;
  chain::ProgramDescriptor program;
  attestation::VendorRegistry registry;
  std::vector<attestation::VendorAuthority> authorities;  // index = vendor id - 1
  std::vector<attestation::EnclaveIdentity> enclaves;     // index = node id
  selection::EnclaveRoster roster;
  chain::ChainState genesis_state;
  chain::Block genesis;

  [[nodiscard]] const attestation::VendorAuthority& authority(attestation::VendorId v) const {
    return authorities.at(v.value - 1);
  }
  /// Node id owning the enclave with this block key, if any.
  [[nodiscard]] std::optional<std::uint32_t> node_of(const crypto::PublicKey& pk) const;
};

World build_world(const Scenario& s, std::uint64_t seed);

/// Genesis document for a world (chain id, program, balances, vendors, k,
/// enclave rosters, master seed).
std::string genesis_to_json(const World& w);

}  // namespace pote::sim
