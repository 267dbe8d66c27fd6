/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pote/scenario.hpp"
#include "pote/validation.hpp"

// Deterministic discrete-event simulation of a validator network running the
// attested-block round lifecycle.
namespace pote::sim {

/// Logical operation counts; a hardware-independent proxy for CPU cost.
struct OpCounters {
  std::uint64_t hash = 0;
  std::uint64_t sign = 0;
  std::uint64_t verify = 0;
  std::uint64_t quote_issue = 0;
  std::uint64_t quote_verify = 0;

  OpCounters& operator+=(const OpCounters& o);
  [[nodiscard]] std::uint64_t total() const {
    return hash + sign + verify + quote_issue + quote_verify;
  }
  bool operator==(const OpCounters&) const = default;
};

struct Rejection {
  std::uint32_t validator = 0;
  validation::RejectReason reason = validation::RejectReason::malformed;
  /// True when the rejected artifact came from an adversarial transform.
  bool adversarial = false;

  bool operator==(const Rejection&) const = default;
};

inline constexpr std::int64_t kNever = -1;

// One proposal attempt. Times are simulated microseconds; kNever marks a
// node that did not observe or finalize during this attempt.
struct RoundRecord {
  std::uint64_t round = 0;
  std::uint64_t height = 0;
  std::uint32_t attempt = 0;
  std::uint32_t proposer = 0;
  std::uint8_t proposer_vendor = 0;
  /// mode name, "forged" for a colluding proposer's false transition, or "none".
  std::string adversary = "none";
  /// Node whose host ran the adversarial transform this round, if any.
  std::int64_t attacker = kNever;
  std::int64_t t_start_us = 0;
  std::int64_t t_proposed_us = kNever;
  std::uint32_t tx_count = 0;
  std::vector<bool> skipped;
  Digest32 block_hash;
  std::vector<std::int64_t> observed_us;
  std::vector<std::int64_t> finalized_us;
  std::vector<bool> via_sync;
  std::vector<Rejection> rejections;
  std::uint32_t reexecution_refusals = 0;
  std::vector<std::uint32_t> forged_finalized_by;
  bool stalled = false;
  bool paths_agree = true;
};

struct SimResult {
  Scenario scenario;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> records;
  /// Per node: finalized chain, honesty (vendor not compromised), counters.
  std::vector<validation::FinalizedChain> chains;
  std::vector<bool> honest;
  std::vector<OpCounters> ops;
  std::uint64_t dropped_messages = 0;
  std::uint64_t partitioned_messages = 0;
  std::uint64_t events_processed = 0;
  std::int64_t end_time_us = 0;

  [[nodiscard]] std::size_t stalled_rounds() const;
  [[nodiscard]] bool liveness_stall() const { return stalled_rounds() > 0; }
};

/// Pure function of (scenario, seed): identical inputs give identical results.
/// Throws ConfigInvalid.
SimResult run_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace pote::sim
