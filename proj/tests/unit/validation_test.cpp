#include <gtest/gtest.h>

#include "pote/validation.hpp"
#include "support.hpp"

namespace pote::validation {
namespace {

using chain::AccountId;

struct Fixture {
  sim::World world = sim::build_world(test::small_scenario(), 5);
  test::SealedBlock sealed = test::seal_height_one(
      world, {{AccountId::from_index(0), AccountId::from_index(1), 10, 0}});

  const attestation::EnclaveIdentity& proposer() const { return world.enclaves[sealed.proposer]; }
  ValidationVerdict check(const chain::Block& b) const {
    return validate_block(b, world.registry, sealed.ctx);
  }
};

TEST(Validate, AcceptsHonestBlock) {
  Fixture f;
  EXPECT_EQ(f.check(f.sealed.block).to_string(), "accept");
  EXPECT_TRUE(validate_block(codec::encode(f.sealed.block), f.world.registry, f.sealed.ctx).accepted);
}

TEST(Validate, MalformedBytes) {
  Fixture f;
  auto bytes = codec::encode(f.sealed.block);
  bytes.push_back(0);
  EXPECT_EQ(validate_block(bytes, f.world.registry, f.sealed.ctx).reason, RejectReason::malformed);
  auto b = f.sealed.block;
  b.header.attestation_quote.pop_back();
  EXPECT_EQ(f.check(b).reason, RejectReason::malformed);
}

TEST(Validate, BadParent) {
  Fixture f;
  auto ctx = f.sealed.ctx;
  ctx.expected_height = 2;
  EXPECT_EQ(validate_block(f.sealed.block, f.world.registry, ctx).reason, RejectReason::bad_parent);
  ctx = f.sealed.ctx;
  ctx.expected_parent_hash.mutable_bytes()[0] ^= 1;
  EXPECT_EQ(validate_block(f.sealed.block, f.world.registry, ctx).reason, RejectReason::bad_parent);
}

TEST(Validate, WrongProposer) {
  Fixture f;
  const auto other = (f.sealed.proposer + 1) % f.world.enclaves.size();
  const auto& e = f.world.enclaves[other];
  auto b = chain::build_block(f.world.genesis, f.world.genesis_state, {}, 1000, e, f.world.registry);
  b = chain::seal_block(std::move(b), e, f.world.authority(e.vendor_id), f.sealed.ctx.expected_nonce);
  EXPECT_EQ(f.check(b).to_string(), "reject(wrong_proposer)");
}

TEST(Validate, AttestationInvalid) {
  Fixture f;
  auto registry = f.world.registry;
  registry.set_vendor_status(f.proposer().vendor_id, attestation::VendorStatus::revoked);
  auto v = validate_block(f.sealed.block, registry, f.sealed.ctx);
  EXPECT_EQ(v.reason, RejectReason::attestation_invalid);
  EXPECT_EQ(v.quote_outcome, attestation::VerifyOutcome::revoked_vendor);
}

TEST(Validate, CommitmentMismatchAfterTamper) {
  Fixture f;
  auto b = f.sealed.block;
  b.body.transactions[0].amount = 11;
  chain::sign_block(b, f.proposer());
  EXPECT_EQ(f.check(b).reason, RejectReason::commitment_mismatch);
}

TEST(Validate, SignatureInvalid) {
  Fixture f;
  auto b = f.sealed.block;
  b.header.enclave_signature[3] ^= 1;
  EXPECT_EQ(f.check(b).reason, RejectReason::signature_invalid);
}

TEST(Validate, FreshnessViolation) {
  Fixture f;
  auto ctx = f.sealed.ctx;
  ctx.expected_nonce.mutable_bytes()[0] ^= 1;
  EXPECT_EQ(validate_block(f.sealed.block, f.world.registry, ctx).reason,
            RejectReason::freshness_violation);
}

TEST(Validate, ReasonStrings) {
  for (std::uint8_t i = 0; i < kRejectReasonCount; ++i) {
    auto r = static_cast<RejectReason>(i);
    EXPECT_EQ(reject_reason_from_string(to_string(r)), r);
  }
  EXPECT_FALSE(reject_reason_from_string("nope").has_value());
}

std::vector<ReAttestation> all_attestations(const Fixture& f) {
  std::vector<ReAttestation> out;
  for (std::uint32_t i = 0; i < f.world.enclaves.size(); ++i) {
    const auto& e = f.world.enclaves[i];
    out.push_back(produce_reattestation(f.sealed.block, e, i, f.world.authority(e.vendor_id),
                                        f.sealed.ctx, f.world.genesis_state));
  }
  return out;
}

TEST(Finality, ReachesThresholdWithDistinctVendors) {
  Fixture f;
  FinalityTracker t(chain::block_commitment(f.sealed.block), f.sealed.ctx, 3);
  auto atts = all_attestations(f);
  t.record_attestation(atts[0], f.world.registry);
  t.record_attestation(atts[0], f.world.registry);
  EXPECT_EQ(t.distinct_vendors(), 1u);
  EXPECT_EQ(t.attestation_count(), 2u);
  t.record_attestation(atts[1], f.world.registry);
  EXPECT_FALSE(t.finalized());
  t.record_attestation(atts[2], f.world.registry);
  EXPECT_TRUE(t.finalized());
  auto cert = t.certificate();
  EXPECT_EQ(cert.quotes.size(), 3u);
  EXPECT_TRUE(verify_certificate(cert, f.sealed.block, f.world.registry, f.sealed.ctx).ok);
  EXPECT_EQ(codec::decode<FinalityCertificate>(codec::encode(cert)), cert);
}

TEST(Finality, RejectsForeignAndStaleAttestations) {
  Fixture f;
  auto atts = all_attestations(f);
  Digest32 other;
  other.mutable_bytes()[0] = 1;
  FinalityTracker wrong(other, f.sealed.ctx, 3);
  EXPECT_THROW(wrong.record_attestation(atts[0], f.world.registry), CommitmentMismatch);

  auto stale_ctx = f.sealed.ctx;
  stale_ctx.expected_nonce.mutable_bytes()[1] ^= 1;
  FinalityTracker stale(chain::block_commitment(f.sealed.block), stale_ctx, 3);
  EXPECT_THROW(stale.record_attestation(atts[0], f.world.registry), InvalidQuote);

  auto bad = atts[0];
  bad.quote.vendor_signature.bytes[0] ^= 1;
  FinalityTracker t(chain::block_commitment(f.sealed.block), f.sealed.ctx, 3);
  EXPECT_THROW(t.record_attestation(bad, f.world.registry), InvalidQuote);
}

TEST(Finality, ReattestationRefusesWrongState) {
  Fixture f;
  const auto& e = f.world.enclaves[0];
  chain::ChainState other = f.world.genesis_state;
  other.set_account(AccountId::from_index(0), {1, 0});
  EXPECT_THROW(produce_reattestation(f.sealed.block, e, 0, f.world.authority(e.vendor_id),
                                     f.sealed.ctx, other),
               StateTransitionMismatch);
}

TEST(Finality, CertificateChecks) {
  Fixture f;
  FinalityTracker t(chain::block_commitment(f.sealed.block), f.sealed.ctx, 3);
  auto atts = all_attestations(f);
  t.record_attestation(atts[0], f.world.registry);
  t.record_attestation(atts[1], f.world.registry);
  auto two = verify_certificate(t.certificate(), f.sealed.block, f.world.registry, f.sealed.ctx);
  EXPECT_FALSE(two.ok);
  t.record_attestation(atts[2], f.world.registry);
  auto cert = t.certificate();
  auto stale = f.sealed.ctx;
  stale.expected_height = 9;
  EXPECT_FALSE(verify_certificate(cert, f.sealed.block, f.world.registry, stale).ok);
  cert.commitment.mutable_bytes()[0] ^= 1;
  EXPECT_FALSE(verify_certificate(cert, f.sealed.block, f.world.registry, f.sealed.ctx).ok);
}

TEST(Finalize, ReplayAndAdoptAgree) {
  Fixture f;
  FinalityTracker t(chain::block_commitment(f.sealed.block), f.sealed.ctx, 3);
  for (const auto& a : all_attestations(f)) t.record_attestation(a, f.world.registry);
  auto block = std::make_shared<const chain::Block>(f.sealed.block);
  auto adopted = std::make_shared<const chain::ChainState>(
      chain::apply_batch(f.world.genesis_state, block->body.transactions));

  FinalizedChain replay_chain(f.world.genesis, f.world.genesis_state);
  FinalizedChain adopt_chain(f.world.genesis, f.world.genesis_state);
  auto r = finalize(t, replay_chain, block, FinalizeMode::replay, adopted);
  auto a = finalize(t, adopt_chain, block, FinalizeMode::adopt, adopted);
  EXPECT_TRUE(r.paths_agree);
  EXPECT_TRUE(a.paths_agree);
  EXPECT_EQ(replay_chain.head_hash(), adopt_chain.head_hash());
  EXPECT_EQ(*replay_chain.state(), *adopt_chain.state());
  EXPECT_EQ(replay_chain.height(), 1u);
  EXPECT_THROW(finalize(t, replay_chain, block, FinalizeMode::replay), AlreadyFinalized);
}

TEST(Finalize, RequiresThresholdAndMatchingState) {
  Fixture f;
  auto block = std::make_shared<const chain::Block>(f.sealed.block);
  FinalityTracker partial(chain::block_commitment(*block), f.sealed.ctx, 3);
  FinalizedChain c(f.world.genesis, f.world.genesis_state);
  EXPECT_THROW(finalize(partial, c, block, FinalizeMode::replay), NotFinalized);

  FinalityTracker t(chain::block_commitment(*block), f.sealed.ctx, 3);
  for (const auto& a : all_attestations(f)) t.record_attestation(a, f.world.registry);
  auto wrong = std::make_shared<const chain::ChainState>(f.world.genesis_state);
  EXPECT_THROW(finalize(t, c, block, FinalizeMode::adopt, wrong), CommitmentMismatch);
  auto out = finalize(t, c, block, FinalizeMode::replay, wrong);
  EXPECT_FALSE(out.paths_agree);
}

TEST(Context, FollowsHeadOfChain) {
  Fixture f;
  FinalizedChain c(f.world.genesis, f.world.genesis_state);
  EXPECT_EQ(make_round_context(c, f.world.roster, f.world.registry), f.sealed.ctx);
  EXPECT_EQ(finalize_mode_from_string("adopt"), FinalizeMode::adopt);
  EXPECT_FALSE(finalize_mode_from_string("x").has_value());
}

}  // namespace
}  // namespace pote::validation
