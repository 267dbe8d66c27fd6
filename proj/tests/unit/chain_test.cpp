#include <gtest/gtest.h>

#include "pote/chain.hpp"
#include "pote/prng.hpp"
#include "support.hpp"

namespace pote::chain {
namespace {

using test::golden;

AccountId acct(std::uint64_t n) { return AccountId::from_index(n); }

ChainState two_accounts() {
  ChainState s;
  s.set_account(acct(0), {100, 0});
  s.set_account(acct(1), {50, 3});
  return s;
}

TEST(Account, FromIndexMatchesGolden) {
  EXPECT_EQ(acct(0).to_hex(), golden()["account_0"].get<std::string>());
  EXPECT_EQ(acct(1).to_hex(), golden()["account_1"].get<std::string>());
}

TEST(State, EncodingAndCommitmentMatchGolden) {
  auto s = two_accounts();
  EXPECT_EQ(to_hex(codec::encode(s)), golden()["state_two_accounts"]["encoding"].get<std::string>());
  EXPECT_EQ(state_commitment(s).to_hex(),
            golden()["state_two_accounts"]["commitment"].get<std::string>());
  EXPECT_EQ(codec::decode<ChainState>(codec::encode(s)), s);
}

TEST(State, DecodeRejectsUnsortedIds) {
  codec::Writer w;
  w.u32(2);
  auto a = acct(0), b = acct(1);
  const auto& hi = std::max(a, b);
  const auto& lo = std::min(a, b);
  w.raw(hi.view()).u64(1).u64(0).raw(lo.view()).u64(1).u64(0);
  EXPECT_THROW(codec::decode<ChainState>(w.bytes()), MalformedEncoding);
}

TEST(Program, MeasurementMatchesGolden) {
  EXPECT_EQ(measure_program(canonical_program()).to_hex(),
            golden()["measurement_sha256"].get<std::string>());
  EXPECT_EQ(measure_program(canonical_program(), HashAlgorithm::blake2b_256).to_hex(),
            golden()["measurement_blake2b256"].get<std::string>());
}

TEST(Batch, AppliesValidTransfer) {
  auto r = apply_batch_report(two_accounts(), {{acct(0), acct(1), 30, 0}});
  EXPECT_FALSE(r.skipped[0]);
  EXPECT_EQ(r.state.find(acct(0))->balance, 70u);
  EXPECT_EQ(r.state.find(acct(0))->next_nonce, 1u);
  EXPECT_EQ(r.state.find(acct(1))->balance, 80u);
  EXPECT_EQ(r.state.find(acct(1))->next_nonce, 3u);
}

TEST(Batch, SkipsInvalidTransactions) {
  auto s = two_accounts();
  std::vector<Transaction> txs = {
      {acct(0), acct(1), 30, 1},    // wrong nonce
      {acct(0), acct(1), 101, 0},   // insufficient
      {acct(9), acct(1), 1, 0},     // unknown sender
      {acct(0), acct(1), 100, 0},   // ok, drains
      {acct(0), acct(1), 1, 1},     // now insufficient
  };
  auto r = apply_batch_report(s, txs);
  EXPECT_EQ(r.skipped, (std::vector<bool>{true, true, true, false, true}));
  EXPECT_EQ(r.skipped_count(), 4u);
  EXPECT_EQ(r.state.find(acct(0))->balance, 0u);
}

TEST(Batch, CreatesReceiverAndHandlesSelfTransfer) {
  auto r = apply_batch_report(two_accounts(), {{acct(0), acct(5), 10, 0}, {acct(0), acct(0), 10, 1}});
  ASSERT_NE(r.state.find(acct(5)), nullptr);
  EXPECT_EQ(r.state.find(acct(5))->balance, 10u);
  EXPECT_EQ(r.state.find(acct(0))->balance, 90u);
  EXPECT_EQ(r.state.find(acct(0))->next_nonce, 2u);
  EXPECT_EQ(r.state.total_balance(), 150u);
}

TEST(Batch, SkipsReceiverOverflow) {
  ChainState s;
  s.set_account(acct(0), {10, 0});
  s.set_account(acct(1), {UINT64_MAX - 5, 0});
  EXPECT_THROW((void)s.total_balance(), ConfigInvalid);
  auto r = apply_batch_report(s, {{acct(0), acct(1), 10, 0}});
  EXPECT_TRUE(r.skipped[0]);
}

TEST(Batch, RandomizedConservationAndDeterminism) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    ChainState s;
    for (std::uint64_t i = 0; i < 6; ++i) s.set_account(acct(i), {rng.uniform(500), rng.uniform(3)});
    std::vector<Transaction> txs;
    for (int t = 0; t < 20; ++t) {
      txs.push_back({acct(rng.uniform(8)), acct(rng.uniform(8)), rng.uniform(200), rng.uniform(3)});
    }
    auto a = apply_batch(s, txs);
    auto b = apply_batch(s, txs);
    EXPECT_EQ(state_commitment(a), state_commitment(b));
    EXPECT_EQ(a.total_balance(), s.total_balance());
  }
}

TEST(Block, GenesisMatchesGolden) {
  ChainState s;
  for (std::uint64_t i = 0; i < 32; ++i) s.set_account(acct(i), {1'000'000, 0});
  auto g = genesis_block(1, s);
  EXPECT_EQ(g.header.state_root.to_hex(), golden()["genesis_32x1e6"]["state_root"].get<std::string>());
  EXPECT_EQ(block_hash(g).to_hex(), golden()["genesis_32x1e6"]["hash"].get<std::string>());
  EXPECT_EQ(g.header.tx_root.to_hex(), golden()["tx_root_empty"].get<std::string>());
}

TEST(Block, CommitmentIgnoresQuoteAndSignature) {
  auto world = sim::build_world(test::small_scenario(), 3);
  auto sealed = test::seal_height_one(world, {{acct(0), acct(1), 5, 0}});
  auto unsealed = sealed.block.committed_view();
  EXPECT_TRUE(unsealed.header.attestation_quote.empty());
  EXPECT_TRUE(unsealed.header.enclave_signature.empty());
  EXPECT_EQ(block_commitment(sealed.block), block_commitment(unsealed));
  EXPECT_NE(block_hash(sealed.block), block_hash(unsealed));
  EXPECT_EQ(sealed.block.header.height, 1u);
  EXPECT_EQ(sealed.block.header.parent_hash, block_hash(world.genesis));
  EXPECT_EQ(sealed.block.header.state_root, sealed.block.body.post_state_commitment);
  EXPECT_EQ(codec::decode<Block>(codec::encode(sealed.block)), sealed.block);
}

TEST(Block, SignatureCoversQuoteEmbeddedBlock) {
  auto world = sim::build_world(test::small_scenario(), 3);
  auto sealed = test::seal_height_one(world);
  const auto& h = sealed.block.header;
  EXPECT_TRUE(crypto::verify(h.proposer_pubkey, codec::encode(sealed.block.signed_view()),
                             ByteView(h.enclave_signature)));
}

TEST(Block, HonestVendorWillNotSealForeignMeasurement) {
  auto world = sim::build_world(test::small_scenario(), 3);
  const auto& e = world.enclaves[0];
  auto b = build_block(world.genesis, world.genesis_state, {}, 1, e, world.registry);
  Digest32 other;
  other.mutable_bytes()[0] = 1;
  EXPECT_THROW(seal_block(b, e, world.authority(e.vendor_id), Digest32{}, HashAlgorithm::sha256, other),
               MeasurementRejected);
}

}  // namespace
}  // namespace pote::chain
