/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace pote::metrics {

using json = nlohmann::ordered_json;

Rational Rational::of(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw ConfigInvalid("rational with zero denominator");
  const auto g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

double Rational::to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

std::string Rational::to_decimal(unsigned places) const {
  // Long division; den is small in practice, so rem * 10 never overflows.
  std::uint64_t whole = num / den;
  std::uint64_t rem = num % den;
  std::string digits;
  for (unsigned i = 0; i < places; ++i) {
    rem *= 10;
    digits += static_cast<char>('0' + rem / den);
    rem %= den;
  }
  if (rem >= den - rem) {
    // Round half-up, carrying through the fraction into the whole part.
    int i = static_cast<int>(digits.size()) - 1;
    for (; i >= 0 && digits[static_cast<std::size_t>(i)] == '9'; --i) {
      digits[static_cast<std::size_t>(i)] = '0';
    }
    if (i >= 0) {
      ++digits[static_cast<std::size_t>(i)];
    } else {
      ++whole;
    }
  }
  std::string out = std::to_string(whole);
  if (places > 0) out += "." + digits;
  return out;
}

LatencyStats latency_stats(std::vector<std::int64_t> samples) {
  LatencyStats s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  s.min_us = samples.front();
  s.max_us = samples.back();
  s.median_us = samples[(n - 1) / 2];
  const auto rank = (95 * n + 99) / 100;  // ceil(0.95 n)
  s.p95_us = samples[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

std::vector<std::int64_t> latency_samples(const sim::SimResult& result) {
  std::vector<std::int64_t> out;
  for (const auto& r : result.records) {
    for (std::size_t i = 0; i < r.finalized_us.size(); ++i) {
      if (i == r.proposer || !result.honest[i] || r.via_sync[i]) continue;
      if (r.finalized_us[i] == sim::kNever || r.observed_us[i] == sim::kNever) continue;
      out.push_back(r.finalized_us[i] - r.observed_us[i]);
    }
  }
  return out;
}

Summary summarize(const sim::SimResult& result) {
  Summary s;
  s.scenario = result.scenario.name;
  s.seed = result.seed;
  s.validators = result.scenario.network.validators;
  s.attempts = result.records.size();
  s.latency = latency_stats(latency_samples(result));
  if (s.latency.median_us > 0) {
    s.tps = Rational::of(std::uint64_t{result.scenario.tx_per_block} * 1'000'000,
                         static_cast<std::uint64_t>(s.latency.median_us));
  }
  for (const auto& r : result.records) {
    if (r.stalled) ++s.stalled_attempts;
    for (const auto& rej : r.rejections) {
      ++s.rejections[static_cast<std::size_t>(rej.reason)];
      if (rej.adversarial) ++s.adversarial_rejections;
    }
    s.reexecution_refusals += r.reexecution_refusals;
    s.forged_finalizations += r.forged_finalized_by.size();
    if (!r.paths_agree) ++s.path_disagreements;
    s.sync_finalizations +=
        static_cast<std::uint64_t>(std::count(r.via_sync.begin(), r.via_sync.end(), true));
  }
  s.dropped_messages = result.dropped_messages;
  s.partitioned_messages = result.partitioned_messages;
  for (const auto& o : result.ops) s.ops += o;
  s.liveness_stall = result.liveness_stall();

  const validation::FinalizedChain* reference = nullptr;
  std::size_t ref_index = 0;
  bool first = true;
  for (std::size_t i = 0; i < result.chains.size(); ++i) {
    if (!result.honest[i]) continue;
    const auto h = result.chains[i].height();
    s.finalized_height = first ? h : std::min(s.finalized_height, h);
    if (first) {
      reference = &result.chains[i];
      ref_index = i;
    }
    first = false;
  }
  if (reference == nullptr) return s;
  for (std::size_t i = 0; i < result.chains.size(); ++i) {
    if (!result.honest[i]) continue;
    const auto& c = result.chains[i];
    const auto common = std::min(c.height(), reference->height());
    for (std::uint64_t h = 1; h <= common; ++h) {
      if (c.at(h).hash != reference->at(h).hash) {
        ++s.divergent_nodes;
        break;
      }
    }
  }

  std::uint64_t txs = 0;
  std::int64_t last_final = 0;
  for (std::uint64_t h = 1; h <= reference->height(); ++h) {
    txs += reference->at(h).block->body.transactions.size();
  }
  for (const auto& r : result.records) {
    if (r.height <= reference->height() && r.finalized_us[ref_index] != sim::kNever) {
      last_final = std::max(last_final, r.finalized_us[ref_index]);
    }
  }
  if (last_final > 0) {
    s.throughput_tps = Rational::of(txs * 1'000'000, static_cast<std::uint64_t>(last_final));
  }
  return s;
}

namespace {

json ops_json(const sim::OpCounters& o) {
  return {{"hash", o.hash},
          {"sign", o.sign},
          {"verify", o.verify},
          {"quote_issue", o.quote_issue},
          {"quote_verify", o.quote_verify},
          {"total", o.total()}};
}

json times_json(const std::vector<std::int64_t>& v) {
  json out = json::array();
  for (auto t : v) out.push_back(t == sim::kNever ? json(nullptr) : json(t));
  return out;
}

}  // namespace

std::string summary_to_json(const Summary& s) {
  json rej = json::object();
  for (std::size_t i = 0; i < s.rejections.size(); ++i) {
    rej[std::string(validation::to_string(static_cast<validation::RejectReason>(i)))] =
        s.rejections[i];
  }
  json j = {
      {"scenario", s.scenario},
      {"seed", s.seed},
      {"validators", s.validators},
      {"attempts", s.attempts},
      {"finalized_height", s.finalized_height},
      {"stalled_attempts", s.stalled_attempts},
      {"liveness_stall", s.liveness_stall},
      {"latency_us",
       {{"samples", s.latency.samples},
        {"min", s.latency.min_us},
        {"median", s.latency.median_us},
        {"p95", s.latency.p95_us},
        {"max", s.latency.max_us}}},
      {"tps", s.tps.to_decimal(1)},
      {"throughput_tps", s.throughput_tps.to_decimal(1)},
      {"rejections", rej},
      {"adversarial_rejections", s.adversarial_rejections},
      {"reexecution_refusals", s.reexecution_refusals},
      {"forged_finalizations", s.forged_finalizations},
      {"path_disagreements", s.path_disagreements},
      {"sync_finalizations", s.sync_finalizations},
      {"divergent_nodes", s.divergent_nodes},
      {"dropped_messages", s.dropped_messages},
      {"partitioned_messages", s.partitioned_messages},
      {"ops", ops_json(s.ops)},
  };
  return j.dump(2);
}

std::string record_to_json(const sim::RoundRecord& r) {
  json rejections = json::array();
  for (const auto& x : r.rejections) {
    rejections.push_back({{"validator", x.validator},
                          {"reason", std::string(validation::to_string(x.reason))},
                          {"adversarial", x.adversarial}});
  }
  json skipped = json::array();
  for (std::size_t i = 0; i < r.skipped.size(); ++i) {
    if (r.skipped[i]) skipped.push_back(i);
  }
  json sync = json::array();
  for (std::size_t i = 0; i < r.via_sync.size(); ++i) {
    if (r.via_sync[i]) sync.push_back(i);
  }
  json j = {
      {"round", r.round},
      {"height", r.height},
      {"attempt", r.attempt},
      {"proposer", r.proposer},
      {"proposer_vendor", r.proposer_vendor},
      {"adversary", r.adversary},
      {"attacker", r.attacker == sim::kNever ? json(nullptr) : json(r.attacker)},
      {"t_start_us", r.t_start_us},
      {"t_proposed_us", r.t_proposed_us == sim::kNever ? json(nullptr) : json(r.t_proposed_us)},
      {"tx_count", r.tx_count},
      {"skipped_tx", skipped},
      {"block_hash", r.block_hash.to_hex()},
      {"observed_us", times_json(r.observed_us)},
      {"finalized_us", times_json(r.finalized_us)},
      {"via_sync", sync},
      {"rejections", rejections},
      {"reexecution_refusals", r.reexecution_refusals},
      {"forged_finalized_by", r.forged_finalized_by},
      {"stalled", r.stalled},
      {"paths_agree", r.paths_agree},
  };
  return j.dump();
}

}  // namespace pote::metrics
