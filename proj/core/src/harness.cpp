/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "pote/documents.hpp"

namespace pote::harness {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string ms_string(std::int64_t us) {
  return metrics::Rational::of(static_cast<std::uint64_t>(std::max<std::int64_t>(us, 0)), 1000)
      .to_decimal(3);
}

}  // namespace

RunOutput execute(const sim::Scenario& scenario, std::uint64_t seed) {
  RunOutput out{sim::run_scenario(scenario, seed), {}, {}, {}};
  out.summary = metrics::summarize(out.result);
  for (const auto& r : out.result.records) {
    out.records_jsonl += metrics::record_to_json(r);
    out.records_jsonl += '\n';
  }
  out.summary_json = metrics::summary_to_json(out.summary);
  return out;
}

int cmd_run(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  RunOutput run;
  try {
    const auto scenario = sim::load_scenario(scenario_path);
    run = execute(scenario, seed.value_or(scenario.seed));
  } catch (const ConfigInvalid& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::filesystem::create_directories(out_dir);
  docs::write_text(out_dir / "records.jsonl", run.records_jsonl);
  docs::write_text(out_dir / "summary.json", run.summary_json);
  const auto& s = run.summary;
  out << "attempts=" << s.attempts << " finalized_height=" << s.finalized_height
      << " stalled=" << s.stalled_attempts << " median_ms=" << ms_string(s.latency.median_us)
      << " p95_ms=" << ms_string(s.latency.p95_us) << " tps=" << s.tps.to_decimal(1) << '\n';
  if (s.liveness_stall) {
    err << "liveness stall: " << s.stalled_attempts << " of " << s.attempts
        << " attempts did not finalize within the round timeout\n";
    return kExitStall;
  }
  return kExitOk;
}

std::vector<LatencyRow> sweep_latency(const std::vector<std::uint32_t>& counts,
                                      const sim::Scenario& base, std::uint64_t seed,
                                      bool parallel) {
  if (counts.empty()) throw ConfigInvalid("sweep needs at least one validator count");
  if (!std::is_sorted(counts.begin(), counts.end()) ||
      std::adjacent_find(counts.begin(), counts.end()) != counts.end()) {
    throw ConfigInvalid("validator counts must be strictly ascending");
  }
  std::vector<sim::Scenario> scenarios;
  for (auto c : counts) {
    sim::Scenario s = base;
    s.network.validators = c;
    s.network.enclaves_per_vendor = sim::round_robin_enclaves(c, s.network.vendors);
    sim::validate_scenario(s);
    scenarios.push_back(std::move(s));
  }
  auto one = [seed](const sim::Scenario& s) {
    return LatencyRow{s.network.validators, metrics::summarize(sim::run_scenario(s, seed))};
  };
  std::vector<LatencyRow> rows;
  if (!parallel) {
    for (const auto& s : scenarios) rows.push_back(one(s));
    return rows;
  }
  std::vector<std::future<LatencyRow>> futures;
  for (const auto& s : scenarios) futures.push_back(std::async(std::launch::async, one, s));
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

std::string latency_table(const std::vector<LatencyRow>& rows) {
  std::ostringstream os;
  os << "validators  median_ms  p95_ms  samples  finalized  stalled\n";
  for (const auto& r : rows) {
    os << std::setw(10) << r.validators << std::setw(11) << ms_string(r.summary.latency.median_us)
       << std::setw(8) << ms_string(r.summary.latency.p95_us) << std::setw(9)
       << r.summary.latency.samples << std::setw(11) << r.summary.finalized_height << std::setw(9)
       << r.summary.stalled_attempts << '\n';
  }
  return os.str();
}

std::optional<TpsMode> tps_mode_from_string(std::string_view s) {
  if (s == "by_processing_time") return TpsMode::by_processing_time;
  if (s == "by_block_size") return TpsMode::by_block_size;
  return std::nullopt;
}

sim::Scenario tps_scenario(std::uint32_t tx_per_block, double commit_ms) {
  sim::Scenario s;
  s.name = "tps-" + std::to_string(tx_per_block) + "tx-" + format_number(commit_ms) + "ms";
  s.network = {3, 3, {1, 1, 1}, 3};
  s.ledger = {1, HashAlgorithm::sha256, 256, 1'000'000'000};
  s.rounds = 3;
  s.tx_per_block = tx_per_block;
  // Everything but execution is free, so commit latency is execution time.
  s.delay.exec_ms_per_100tx = tx_per_block == 0 ? 0 : commit_ms * 100.0 / tx_per_block;
  s.seed = 1;
  s.round_timeout_ms = commit_ms * 10 + 1000;
  return s;
}

std::vector<TpsRow> sweep_tps(TpsMode mode, const std::vector<double>& points, std::uint64_t seed) {
  if (points.empty()) throw ConfigInvalid("sweep needs at least one point");
  std::vector<TpsRow> rows;
  for (double p : points) {
    if (!(p > 0)) throw ConfigInvalid("sweep points must be positive");
    const bool by_time = mode == TpsMode::by_processing_time;
    if (!by_time && p != std::floor(p)) throw ConfigInvalid("block sizes must be whole numbers");
    const auto tx = by_time ? 1000u : static_cast<std::uint32_t>(p);
    const double ms = by_time ? p : 100.0;
    const auto summary = metrics::summarize(sim::run_scenario(tps_scenario(tx, ms), seed));
    if (summary.latency.samples == 0 || summary.latency.median_us <= 0) {
      throw Error("no commit latency measured for point " + format_number(p));
    }
    TpsRow row;
    row.label = std::to_string(tx) + "tx@" + format_number(ms) + "ms";
    row.tx_per_block = tx;
    row.commit_latency_us = summary.latency.median_us;
    row.tps = metrics::Rational::of(std::uint64_t{tx} * 1'000'000,
                                    static_cast<std::uint64_t>(row.commit_latency_us));
    rows.push_back(std::move(row));
  }
  // One block per 12 s slot; the slot, not the network, bounds throughput.
  TpsRow baseline;
  baseline.label = "slotted-baseline";
  baseline.tx_per_block = 1000;
  baseline.commit_latency_us = 12'000'000;
  baseline.tps = metrics::Rational::of(1000ULL * 1'000'000, 12'000'000);
  baseline.baseline = true;
  rows.push_back(std::move(baseline));
  return rows;
}

std::string tps_table(const std::vector<TpsRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "point" << std::right << std::setw(8) << "tx"
     << std::setw(14) << "commit_ms" << std::setw(12) << "tps" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(20) << r.label << std::right << std::setw(8) << r.tx_per_block
       << std::setw(14) << ms_string(r.commit_latency_us) << std::setw(12) << r.tps.to_decimal(1)
       << '\n';
  }
  return os.str();
}

int cmd_verify(const std::filesystem::path& block, const std::filesystem::path& registry,
               const std::filesystem::path& context,
               const std::optional<std::filesystem::path>& certificate, std::ostream& out,
               std::ostream& err) {
  Bytes block_bytes;
  std::optional<attestation::VendorRegistry> reg;
  validation::RoundContext ctx;
  std::optional<validation::FinalityCertificate> cert;
  try {
    block_bytes = docs::read_binary(block);
    reg.emplace(docs::registry_from_json(docs::read_text(registry)));
    ctx = docs::context_from_json(docs::read_text(context));
    if (certificate) {
      cert = codec::decode<validation::FinalityCertificate>(docs::read_binary(*certificate));
    }
  } catch (const Error& e) {
    err << "cannot load inputs: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto verdict = validation::validate_block(block_bytes, *reg, ctx);
  out << verdict.to_string() << '\n';
  if (!verdict.accepted) {
    return verdict.reason == validation::RejectReason::malformed ? kExitConfig : kExitReject;
  }
  if (cert) {
    const auto decoded = codec::decode<chain::Block>(block_bytes);
    const auto check = validation::verify_certificate(*cert, decoded, *reg, ctx);
    out << (check.ok ? "certificate ok" : "certificate rejected: " + check.reason) << '\n';
    if (!check.ok) return kExitReject;
  }
  return kExitOk;
}

CounterReport counters(const sim::Scenario& scenario, std::uint64_t seed) {
  const auto result = sim::run_scenario(scenario, seed);
  const auto world = sim::build_world(scenario, seed);
  CounterReport report;
  report.attempts = result.records.size();
  for (std::uint32_t i = 0; i < result.ops.size(); ++i) {
    report.rows.push_back({i, world.enclaves[i].vendor_id.value, result.honest[i], result.ops[i]});
  }
  return report;
}

std::string counters_table(const CounterReport& report) {
  std::ostringstream os;
  const auto per = [&](std::uint64_t v) {
    return report.attempts == 0 ? std::string("-")
                                : metrics::Rational::of(v, report.attempts).to_decimal(2);
  };
  os << "attempts " << report.attempts << '\n';
  os << "node vendor honest      hash    sign  verify  q_issue  q_verify  | per attempt: hash sign "
        "verify q_issue q_verify\n";
  for (const auto& r : report.rows) {
    const auto& o = r.totals;
    os << std::setw(4) << r.node << std::setw(7) << int{r.vendor} << std::setw(7)
       << (r.honest ? "yes" : "no") << std::setw(10) << o.hash << std::setw(8) << o.sign
       << std::setw(8) << o.verify << std::setw(9) << o.quote_issue << std::setw(10)
       << o.quote_verify << "  | " << per(o.hash) << ' ' << per(o.sign) << ' ' << per(o.verify)
       << ' ' << per(o.quote_issue) << ' ' << per(o.quote_verify) << '\n';
  }
  return os.str();
}

int cmd_counters(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
                 std::ostream& out, std::ostream& err) {
  try {
    const auto scenario = sim::load_scenario(scenario_path);
    out << counters_table(counters(scenario, seed.value_or(scenario.seed)));
  } catch (const ConfigInvalid& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

void make_fixture(const std::filesystem::path& out_dir, std::uint64_t seed) {
  sim::Scenario s = tps_scenario(4, 1);
  s.name = "fixture";
  s.ledger.accounts = 8;
  s.ledger.initial_balance = 1000;
  const auto world = sim::build_world(s, seed);
  const auto alg = s.ledger.hash_algorithm;
  const auto genesis_hash = chain::block_hash(world.genesis, alg);
  const auto ctx = validation::make_round_context(genesis_hash, 1, world.roster, world.registry);
  const auto proposer = world.node_of(ctx.expected_proposer.pk_block).value();
  const auto& enclave = world.enclaves[proposer];

  std::vector<chain::Transaction> txs;
  for (std::uint64_t i = 0; i < 4; ++i) {
    txs.push_back({chain::AccountId::from_index(i), chain::AccountId::from_index(i + 4), 10 * (i + 1),
                   0});
  }
  auto unsealed =
      chain::build_block(world.genesis, world.genesis_state, txs, 1000, enclave, world.registry);
  const auto block = chain::seal_block(std::move(unsealed), enclave,
                                       world.authority(enclave.vendor_id), ctx.expected_nonce, alg);

  validation::FinalityTracker tracker(chain::block_commitment(block, alg), ctx,
                                      world.registry.diversity_threshold());
  const auto own = codec::decode<attestation::AttestationQuote>(block.header.attestation_quote);
  tracker.record_attestation({own.vendor_id, own, proposer}, world.registry);
  for (std::uint32_t i = 0; i < world.enclaves.size(); ++i) {
    if (i == proposer) continue;
    const auto& e = world.enclaves[i];
    tracker.record_attestation(
        validation::produce_reattestation(block, e, i, world.authority(e.vendor_id), ctx,
                                          world.genesis_state, alg),
        world.registry);
  }

  auto stale = ctx;
  stale.expected_nonce = selection::derive_seed(Digest32{}, 0, alg).value;
  auto block_bytes = codec::encode(block);
  auto tampered = block_bytes;
  tampered.back() ^= 0x01;  // last byte of the post-state commitment

  std::filesystem::create_directories(out_dir);
  docs::write_binary(out_dir / "block.bin", block_bytes);
  docs::write_binary(out_dir / "tampered_block.bin", tampered);
  docs::write_binary(out_dir / "certificate.bin", codec::encode(tracker.certificate()));
  docs::write_text(out_dir / "registry.json", docs::registry_to_json(world.registry));
  docs::write_text(out_dir / "context.json", docs::context_to_json(ctx));
  docs::write_text(out_dir / "stale_context.json", docs::context_to_json(stale));
}

}  // namespace pote::harness
