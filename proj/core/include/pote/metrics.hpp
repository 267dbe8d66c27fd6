/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pote/simnet.hpp"

namespace pote::metrics {

/// Exact non-negative ratio, kept reduced.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational of(std::uint64_t num, std::uint64_t den);
  [[nodiscard]] double to_double() const;
  /// Decimal rendering rounded half-up to `places` digits.
  [[nodiscard]] std::string to_decimal(unsigned places = 1) const;
  bool operator==(const Rational&) const = default;
};

struct LatencyStats {
  std::size_t samples = 0;
  std::int64_t min_us = 0;
  /// Lower median.
  std::int64_t median_us = 0;
  /// Nearest-rank 95th percentile.
  std::int64_t p95_us = 0;
  std::int64_t max_us = 0;
};

LatencyStats latency_stats(std::vector<std::int64_t> samples);

/// Observation-to-finality latency of honest non-proposers that finalized on
/// the normal path (not through catch-up), over every attempt.
std::vector<std::int64_t> latency_samples(const sim::SimResult& result);

struct Summary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::uint32_t validators = 0;
  std::uint64_t attempts = 0;
  /// Lowest finalized height among honest nodes.
  std::uint64_t finalized_height = 0;
  std::uint64_t stalled_attempts = 0;
  LatencyStats latency;
  std::array<std::uint64_t, validation::kRejectReasonCount> rejections{};
  std::uint64_t adversarial_rejections = 0;
  std::uint64_t reexecution_refusals = 0;
  std::uint64_t forged_finalizations = 0;
  std::uint64_t path_disagreements = 0;
  std::uint64_t sync_finalizations = 0;
  std::uint64_t dropped_messages = 0;
  std::uint64_t partitioned_messages = 0;
  sim::OpCounters ops;
  /// tx_per_block * 1000 / median commit latency in ms (0 without samples).
  Rational tps;
  /// Finalized transactions per simulated second on the first honest node.
  Rational throughput_tps;
  bool liveness_stall = false;
  /// Honest nodes whose chains disagree with the first honest node.
  std::uint64_t divergent_nodes = 0;
};

Summary summarize(const sim::SimResult& result);
std::string summary_to_json(const Summary& s);
/// One JSON object (single line) per attempt.
std::string record_to_json(const sim::RoundRecord& r);

}  // namespace pote::metrics
