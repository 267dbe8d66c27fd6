/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "pote/documents.hpp"
#include "pote/harness.hpp"
#include "pote/scenario.hpp"

namespace pote::test {

inline std::filesystem::path fixture_dir() { return POTE_FIXTURE_DIR; }
inline std::filesystem::path scenario_dir() { return POTE_SCENARIO_DIR; }

inline const nlohmann::json& golden() {
  static const nlohmann::json g =
      nlohmann::json::parse(docs::read_text(fixture_dir() / "golden.json"));
  return g;
}

inline Digest32 digest_hex(const std::string& hex) { return Digest32::from_hex(hex).value(); }

inline Bytes bytes_hex(const std::string& hex) { return from_hex(hex).value(); }

// A small zero-delay network; cheap enough for property loops.
inline sim::Scenario small_scenario(std::uint32_t validators = 3, std::uint32_t vendors = 3,
                                    std::uint32_t k = 3) {
  sim::Scenario s;
  s.name = "small";
  s.network = {validators, vendors, sim::round_robin_enclaves(validators, vendors), k};
  s.ledger = {1, HashAlgorithm::sha256, 16, 1000};
  s.rounds = 3;
  s.tx_per_block = 8;
  s.delay.base_latency_ms = 1;
  s.delay.attestation_issue_ms = 1;
  s.delay.exec_ms_per_100tx = 1;
  s.seed = 1;
  s.round_timeout_ms = 500;
  return s;
}

// Sealed height-1 block from the elected proposer of `world`.
struct SealedBlock {
  chain::Block block;
  validation::RoundContext ctx;
  std::uint32_t proposer = 0;
};

inline SealedBlock seal_height_one(const sim::World& world,
                                   std::vector<chain::Transaction> txs = {}) {
  const auto alg = world.registry.hash_algorithm();
  const auto parent = chain::block_hash(world.genesis, alg);
  SealedBlock out;
  out.ctx = validation::make_round_context(parent, 1, world.roster, world.registry);
  out.proposer = world.node_of(out.ctx.expected_proposer.pk_block).value();
  const auto& e = world.enclaves[out.proposer];
  auto b = chain::build_block(world.genesis, world.genesis_state, std::move(txs), 1000, e,
                              world.registry);
  out.block = chain::seal_block(std::move(b), e, world.authority(e.vendor_id),
                                out.ctx.expected_nonce, alg);
  return out;
}

}  // namespace pote::test
