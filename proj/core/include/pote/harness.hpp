/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pote/metrics.hpp"
#include "pote/scenario.hpp"
#include "pote/simnet.hpp"

// Command implementations behind the `pote` tool. Each cmd_* returns the
// process exit code and writes diagnostics to `err`.
namespace pote::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStall = 3;

struct RunOutput {
  sim::SimResult result;
  metrics::Summary summary;
  /// One record per line, newline-terminated.
  std::string records_jsonl;
  std::string summary_json;
};

RunOutput execute(const sim::Scenario& scenario, std::uint64_t seed);

/// Writes records.jsonl and summary.json into `out_dir` (created if needed).
/// The seed defaults to the scenario's own. Exit 0, 2 on ConfigInvalid, 3 on
/// a liveness stall.
int cmd_run(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

struct LatencyRow {
  std::uint32_t validators = 0;
  metrics::Summary summary;
};

/// One row per count, in input order. Each count reuses `base` with the
/// network resized to that many validators spread round-robin over its vendors.
/// Runs execute on worker threads when `parallel` is set. Throws ConfigInvalid
/// for an empty or non-ascending list.
std::vector<LatencyRow> sweep_latency(const std::vector<std::uint32_t>& counts,
                                      const sim::Scenario& base, std::uint64_t seed,
                                      bool parallel = true);
std::string latency_table(const std::vector<LatencyRow>& rows);

enum class TpsMode { by_processing_time, by_block_size };

std::optional<TpsMode> tps_mode_from_string(std::string_view s);

struct TpsRow {
  std::string label;
  std::uint32_t tx_per_block = 0;
  /// Measured median commit latency.
  std::int64_t commit_latency_us = 0;
  metrics::Rational tps;
  bool baseline = false;
};

/// by_processing_time: 1000 tx per block, points are commit times in ms.
/// by_block_size: 100 ms commit, points are transactions per block.
/// Each point runs a zero-delay simulation whose only cost is block execution,
/// sized so the commit latency equals the target. The last row is the slotted
/// baseline (1000 tx per 12 s slot).
std::vector<TpsRow> sweep_tps(TpsMode mode, const std::vector<double>& points, std::uint64_t seed);
std::string tps_table(const std::vector<TpsRow>& rows);

/// The zero-delay scenario used for one sweep_tps point.
sim::Scenario tps_scenario(std::uint32_t tx_per_block, double commit_ms);

/// Prints accept or reject(<reason>); with a certificate also checks it.
/// Exit 0 accept, 1 reject, 2 unreadable or malformed inputs.
int cmd_verify(const std::filesystem::path& block, const std::filesystem::path& registry,
               const std::filesystem::path& context,
               const std::optional<std::filesystem::path>& certificate, std::ostream& out,
               std::ostream& err);

struct CounterRow {
  std::uint32_t node = 0;
  std::uint8_t vendor = 0;
  bool honest = true;
  sim::OpCounters totals;
};

struct CounterReport {
  std::uint64_t attempts = 0;
  std::vector<CounterRow> rows;
};

CounterReport counters(const sim::Scenario& scenario, std::uint64_t seed);
/// Totals and per-attempt averages for every validator.
std::string counters_table(const CounterReport& report);
int cmd_counters(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
                 std::ostream& out, std::ostream& err);

/// Writes block.bin, registry.json, context.json, certificate.bin,
/// stale_context.json and tampered_block.bin for a three-vendor world.
void make_fixture(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace pote::harness
