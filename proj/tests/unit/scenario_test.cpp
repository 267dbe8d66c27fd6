#include <gtest/gtest.h>

#include "pote/scenario.hpp"
#include "support.hpp"

namespace pote::sim {
namespace {

std::string baseline_text() { return docs::read_text(test::scenario_dir() / "baseline.json"); }

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    validate_scenario(parse_scenario(text));
    FAIL() << "accepted: " << fragment;
  } catch (const ConfigInvalid& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(Scenario, ParsesBaseline) {
  auto s = load_scenario(test::scenario_dir() / "baseline.json");
  EXPECT_EQ(s.name, "baseline");
  EXPECT_EQ(s.network.validators, 6u);
  EXPECT_EQ(s.network.k, 3u);
  EXPECT_EQ(s.delay.attestation_issue_ms, 25);
  EXPECT_EQ(s.adversary.mode, AdversaryMode::none);
  EXPECT_FALSE(s.delay.colocate_by_vendor);
  EXPECT_NO_THROW(validate_scenario(s));
}

TEST(Scenario, JsonRoundTrip) {
  auto s = load_scenario(test::scenario_dir() / "healing_partition.json");
  EXPECT_EQ(parse_scenario(scenario_to_json(s)), s);
  auto c = calibrated_latency_scenario(25, 4);
  EXPECT_EQ(parse_scenario(scenario_to_json(c)), c);
}

TEST(Scenario, RejectsUnknownAndMissingFields) {
  expect_config_error(replace(baseline_text(), "\"rounds\"", "\"extra\": 1, \"rounds\""), "extra");
  expect_config_error(replace(baseline_text(), "\"rounds\": 10,", ""), "rounds");
  expect_config_error("{", "scenario");
}

TEST(Scenario, RejectsThresholdAboveVendors) {
  expect_config_error(replace(baseline_text(), "\"k\": 3", "\"k\": 4"), "network.k=4");
}

TEST(Scenario, RejectsBadValues) {
  expect_config_error(replace(baseline_text(), "[2, 2, 2]", "[2, 2, 1]"), "sum");
  expect_config_error(replace(baseline_text(), "\"drop_probability\": 0", "\"drop_probability\": 2"),
                      "drop_probability");
  expect_config_error(replace(baseline_text(), "\"base_latency_ms\": 10", "\"base_latency_ms\": -1"),
                      "base_latency_ms");
  expect_config_error(replace(baseline_text(), "\"sha256\"", "\"md5\""), "hash_algorithm");
  expect_config_error(replace(baseline_text(), "\"splitmix64\"", "\"mt19937\""), "prng");
  expect_config_error(replace(baseline_text(), "\"replay\"", "\"guess\""), "finalize_mode");
}

TEST(Scenario, AdversaryValidation) {
  auto s = load_scenario(test::scenario_dir() / "baseline.json");
  s.adversary.compromised_vendors = {4};
  EXPECT_THROW(validate_scenario(s), ConfigInvalid);
  s.adversary.compromised_vendors = {1, 1};
  EXPECT_THROW(validate_scenario(s), ConfigInvalid);
  s.adversary.compromised_vendors = {};
  s.adversary.from_round = 5;
  s.adversary.to_round = 2;
  EXPECT_THROW(validate_scenario(s), ConfigInvalid);
  for (auto m : {"none", "tamper_after_attest", "keep_quote_alter_block", "replay_old_quote",
                 "rogue_proposer"}) {
    EXPECT_EQ(to_string(adversary_mode_from_string(m).value()), m);
  }
}

TEST(Scenario, RoundRobinEnclaves) {
  EXPECT_EQ(round_robin_enclaves(7, 3), (std::vector<std::uint32_t>{3, 2, 2}));
  auto c = calibrated_latency_scenario(225, 10);
  EXPECT_EQ(c.network.enclaves_per_vendor, (std::vector<std::uint32_t>{75, 75, 75}));
  EXPECT_EQ(c.tx_per_block * c.delay.exec_ms_per_100tx / 100, 20);
  EXPECT_EQ(c.delay.attestation_issue_ms, 25);
  EXPECT_EQ(c.delay.base_latency_ms, 10);
  EXPECT_EQ(c.delay.jitter_ms, 5);
}

TEST(World, DeterministicPerSeed) {
  auto s = load_scenario(test::scenario_dir() / "baseline.json");
  auto a = build_world(s, 1);
  auto b = build_world(s, 1);
  auto c = build_world(s, 2);
  EXPECT_EQ(genesis_to_json(a), genesis_to_json(b));
  EXPECT_NE(genesis_to_json(a), genesis_to_json(c));
  EXPECT_EQ(a.enclaves.size(), 6u);
  for (std::uint32_t i = 0; i < a.enclaves.size(); ++i) {
    EXPECT_EQ(a.node_of(a.enclaves[i].block_keypair.public_key), i);
  }
  EXPECT_EQ(a.genesis_state.total_balance(), 32u * 1'000'000u);
}

TEST(World, UnequalQuotasFillCyclically) {
  auto s = test::small_scenario(6, 3, 1);
  s.network.enclaves_per_vendor = {4, 1, 1};
  auto w = build_world(s, 1);
  std::vector<int> per(4, 0);
  for (const auto& e : w.enclaves) ++per[e.vendor_id.value];
  EXPECT_EQ(per[1], 4);
  EXPECT_EQ(per[2], 1);
  EXPECT_EQ(per[3], 1);
}

TEST(World, CompromisedVendorsMarked) {
  auto s = test::small_scenario();
  s.adversary.compromised_vendors = {2};
  auto w = build_world(s, 1);
  EXPECT_TRUE(w.authority(attestation::VendorId{2}).compromised);
  EXPECT_FALSE(w.authority(attestation::VendorId{1}).compromised);
  EXPECT_EQ(w.registry.find(attestation::VendorId{2})->status, attestation::VendorStatus::compromised);
}

}  // namespace
}  // namespace pote::sim
