#include <gtest/gtest.h>

#include "pote/selection.hpp"
#include "support.hpp"

namespace pote::selection {
namespace {

using test::golden;

TEST(Seed, MatchesGolden) {
  auto s = derive_seed(Digest32{}, 1);
  EXPECT_EQ(s.value.to_hex(), golden()["round_seed_zero_1"].get<std::string>());
  EXPECT_EQ(s.height, 1u);
  EXPECT_NE(derive_seed(Digest32{}, 2).value, s.value);
}

TEST(Seed, VendorChoiceMatchesGolden) {
  auto world = sim::build_world(test::small_scenario(4, 4, 1), 1);
  auto v = sample_vendor(derive_seed(Digest32{}, 1), world.roster);
  EXPECT_EQ(v.value, golden()["vendor_index_of_4"].get<int>() + 1);
}

TEST(Roster, DropsRevokedVendors) {
  auto world = sim::build_world(test::small_scenario(6, 3, 1), 1);
  std::vector<EnclaveRef> refs;
  for (const auto& e : world.enclaves) refs.push_back(EnclaveRef::of(e));
  auto registry = world.registry;
  registry.set_vendor_status(attestation::VendorId{2}, attestation::VendorStatus::revoked);
  auto roster = EnclaveRoster::build(registry, refs);
  EXPECT_EQ(roster.size(), 4u);
  auto eligible = roster.eligible_vendors();
  ASSERT_EQ(eligible.size(), 2u);
  EXPECT_EQ(eligible[0].value, 1);
  EXPECT_EQ(eligible[1].value, 3);
  for (std::uint64_t h = 1; h < 50; ++h) {
    EXPECT_NE(select_proposer(derive_seed(Digest32{}, h), roster).vendor_id.value, 2);
  }
}

TEST(Roster, OrderedByEnclaveIndex) {
  auto world = sim::build_world(test::small_scenario(6, 2, 1), 1);
  std::vector<EnclaveRef> refs;
  for (auto it = world.enclaves.rbegin(); it != world.enclaves.rend(); ++it) {
    refs.push_back(EnclaveRef::of(*it));
  }
  auto roster = EnclaveRoster::build(world.registry, refs);
  const auto& list = roster.enclaves_of(attestation::VendorId{1});
  ASSERT_EQ(list.size(), 3u);
  for (std::uint32_t i = 0; i < list.size(); ++i) EXPECT_EQ(list[i].enclave_index, i);
}

TEST(Roster, EmptyRosterThrows) {
  EnclaveRoster empty;
  EXPECT_THROW(sample_vendor(derive_seed(Digest32{}, 1), empty), EmptyRoster);
  EXPECT_THROW(select_proposer(derive_seed(Digest32{}, 1), empty), EmptyRoster);
}

TEST(Select, DeterministicAndSpread) {
  auto world = sim::build_world(test::small_scenario(8, 4, 1), 1);
  std::map<std::uint8_t, int> counts;
  for (std::uint64_t h = 1; h <= 400; ++h) {
    auto seed = derive_seed(Digest32{}, h);
    auto a = select_proposer(seed, world.roster);
    EXPECT_EQ(a, select_proposer(seed, world.roster));
    ++counts[a.vendor_id.value];
  }
  EXPECT_EQ(counts.size(), 4u);
}

}  // namespace
}  // namespace pote::selection
