/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/validation.hpp"

#include <array>
#include <set>

namespace pote::validation {

namespace {

constexpr std::array<std::string_view, kRejectReasonCount> kReasonNames = {
    "malformed",           "bad_parent",        "wrong_proposer",      "attestation_invalid",
    "commitment_mismatch", "signature_invalid", "freshness_violation",
};

attestation::VerifyOutcome check_quote(const attestation::VendorRegistry& registry,
                                       const attestation::AttestationQuote& quote,
                                       attestation::QuoteVerifyCache* cache) {
  return cache ? cache->verify(registry, quote) : attestation::verify_quote(registry, quote);
}

bool fresh(const attestation::QuoteUserData& ud, const RoundContext& ctx) {
  return ud.height == ctx.expected_height && ud.chain_id == ctx.chain_id &&
         ud.nonce == ctx.expected_nonce;
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  return kReasonNames.at(static_cast<std::size_t>(reason));
}

std::optional<RejectReason> reject_reason_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (kReasonNames[i] == s) return static_cast<RejectReason>(i);
  }
  return std::nullopt;
}

std::string ValidationVerdict::to_string() const {
  if (accepted) return "accept";
  return "reject(" + std::string(validation::to_string(reason)) + ")";
}

ValidationVerdict validate_block(ByteView encoded_block,
                                 const attestation::VendorRegistry& registry,
                                 const RoundContext& ctx, attestation::QuoteVerifyCache* cache) {
  chain::Block block;
  try {
    block = codec::decode<chain::Block>(encoded_block);
  } catch (const MalformedEncoding&) {
    return ValidationVerdict::reject(RejectReason::malformed);
  }
  return validate_block(block, registry, ctx, cache);
}

ValidationVerdict validate_block(const chain::Block& block,
                                 const attestation::VendorRegistry& registry,
                                 const RoundContext& ctx, attestation::QuoteVerifyCache* cache) {
  const auto& h = block.header;

  attestation::AttestationQuote quote;
  try {
    quote = codec::decode<attestation::AttestationQuote>(h.attestation_quote);
  } catch (const MalformedEncoding&) {
    return ValidationVerdict::reject(RejectReason::malformed);
  }
  if (h.enclave_signature.size() != crypto::kSignatureSize) {
    return ValidationVerdict::reject(RejectReason::malformed);
  }

  if (h.parent_hash != ctx.expected_parent_hash || h.height != ctx.expected_height) {
    return ValidationVerdict::reject(RejectReason::bad_parent);
  }

  if (h.proposer_pubkey != ctx.expected_proposer.pk_block ||
      h.tee_vendor_id != ctx.expected_proposer.vendor_id) {
    return ValidationVerdict::reject(RejectReason::wrong_proposer);
  }

  const auto outcome = check_quote(registry, quote, cache);
  if (outcome != attestation::VerifyOutcome::ok || quote.vendor_id != h.tee_vendor_id ||
      quote.user_data.pk_block != h.proposer_pubkey) {
    auto v = ValidationVerdict::reject(RejectReason::attestation_invalid);
    v.quote_outcome = outcome;
    return v;
  }

  const HashAlgorithm alg = registry.hash_algorithm();
  if (chain::block_commitment(block, alg) != quote.user_data.commitment) {
    auto v = ValidationVerdict::reject(RejectReason::commitment_mismatch);
    v.quote_outcome = outcome;
    return v;
  }

  if (!crypto::verify(quote.user_data.pk_block, codec::encode(block.signed_view()),
                      ByteView(h.enclave_signature))) {
    auto v = ValidationVerdict::reject(RejectReason::signature_invalid);
    v.quote_outcome = outcome;
    return v;
  }

  if (!fresh(quote.user_data, ctx)) {
    auto v = ValidationVerdict::reject(RejectReason::freshness_violation);
    v.quote_outcome = outcome;
    return v;
  }

  return ValidationVerdict::accept();
}

ReAttestation produce_reattestation(const chain::Block& block,
                                    const attestation::EnclaveIdentity& validator_enclave,
                                    std::uint32_t validator_id,
                                    const attestation::VendorAuthority& authority,
                                    const RoundContext& ctx, const chain::ChainState& parent_state,
                                    HashAlgorithm alg, std::optional<Digest32> measurement) {
  if (chain::tx_root(block.body.transactions, alg) != block.header.tx_root) {
    throw StateTransitionMismatch("tx_root of height " + std::to_string(block.header.height) +
                                  " does not match its transactions");
  }
  const auto post =
      chain::state_commitment(chain::apply_batch(parent_state, block.body.transactions), alg);
  if (post != block.header.state_root || post != block.body.post_state_commitment) {
    throw StateTransitionMismatch("re-execution of height " + std::to_string(block.header.height) +
                                  " yields " + post.to_hex() + ", block claims " +
                                  block.header.state_root.to_hex());
  }
  attestation::QuoteUserData ud{validator_enclave.block_keypair.public_key,
                                chain::block_commitment(block, alg), ctx.expected_height,
                                ctx.chain_id, ctx.expected_nonce};
  auto quote = attestation::issue_quote(
      authority, measurement.value_or(authority.canonical_measurement), ud);
  return {authority.id, quote, validator_id};
}

void FinalityCertificate::encode_to(codec::Writer& w) const {
  w.digest(commitment).u32(static_cast<std::uint32_t>(quotes.size()));
  for (const auto& q : quotes) q.encode_to(w);
}

FinalityCertificate FinalityCertificate::decode_from(codec::Reader& r) {
  FinalityCertificate c;
  c.commitment = r.digest();
  const std::uint32_t count = r.u32();
  if (static_cast<std::uint64_t>(count) * attestation::kQuoteEncodedSize > r.remaining()) {
    throw MalformedEncoding("certificate quote count " + std::to_string(count) +
                            " exceeds remaining input");
  }
  c.quotes.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    c.quotes.push_back(attestation::AttestationQuote::decode_from(r));
  }
  return c;
}

FinalityTracker::FinalityTracker(const Digest32& candidate, const RoundContext& ctx,
                                 std::uint32_t k)
    : candidate_(candidate), ctx_(ctx), k_(k) {}

void FinalityTracker::record_attestation(const ReAttestation& att,
                                         const attestation::VendorRegistry& registry,
                                         attestation::QuoteVerifyCache* cache) {
  if (att.quote.user_data.commitment != candidate_) {
    throw CommitmentMismatch("attestation from validator " + std::to_string(att.validator) +
                             " is for another candidate");
  }
  const auto outcome = check_quote(registry, att.quote, cache);
  if (outcome != attestation::VerifyOutcome::ok) {
    throw InvalidQuote("attestation from validator " + std::to_string(att.validator) + ": " +
                       std::string(attestation::to_string(outcome)));
  }
  if (att.quote.vendor_id != att.vendor_id) {
    throw InvalidQuote("attestation vendor id does not match its quote");
  }
  if (!fresh(att.quote.user_data, ctx_)) {
    throw InvalidQuote("attestation from validator " + std::to_string(att.validator) +
                       " is bound to another round");
  }
  collected_[att.vendor_id].push_back(att);
  ++count_;
}

FinalityCertificate FinalityTracker::certificate() const {
  FinalityCertificate c{candidate_, {}};
  for (const auto& [v, atts] : collected_) c.quotes.push_back(atts.front().quote);
  return c;
}

CertificateCheck verify_certificate(const FinalityCertificate& cert, const chain::Block& block,
                                    const attestation::VendorRegistry& registry,
                                    const RoundContext& ctx) {
  if (cert.commitment != chain::block_commitment(block, registry.hash_algorithm())) {
    return {false, "certificate commitment does not match block"};
  }
  std::set<attestation::VendorId> vendors;
  for (const auto& q : cert.quotes) {
    auto outcome = attestation::verify_quote(registry, q);
    if (outcome != attestation::VerifyOutcome::ok) {
      return {false, "quote from vendor " + std::to_string(q.vendor_id.value) + ": " +
                         std::string(attestation::to_string(outcome))};
    }
    if (q.user_data.commitment != cert.commitment) {
      return {false, "quote from vendor " + std::to_string(q.vendor_id.value) +
                         " binds another commitment"};
    }
    if (!fresh(q.user_data, ctx)) {
      return {false, "quote from vendor " + std::to_string(q.vendor_id.value) +
                         " is bound to another round"};
    }
    vendors.insert(q.vendor_id);
  }
  if (vendors.size() < registry.diversity_threshold()) {
    return {false, "only " + std::to_string(vendors.size()) + " distinct vendors, need " +
                       std::to_string(registry.diversity_threshold())};
  }
  return {true, ""};
}

FinalizedChain::FinalizedChain(const chain::Block& genesis, const chain::ChainState& genesis_state,
                               HashAlgorithm alg)
    : state_(std::make_shared<const chain::ChainState>(genesis_state)), alg_(alg) {
  auto g = std::make_shared<const chain::Block>(genesis);
  entries_.push_back({g, chain::block_hash(*g, alg), {}});
}

struct FinalizeAccess {
  static std::vector<FinalizedEntry>& entries(FinalizedChain& c) { return c.entries_; }
  static std::shared_ptr<const chain::ChainState>& state(FinalizedChain& c) { return c.state_; }
};

std::string_view to_string(FinalizeMode mode) {
  return mode == FinalizeMode::replay ? "replay" : "adopt";
}

std::optional<FinalizeMode> finalize_mode_from_string(std::string_view s) {
  if (s == "replay") return FinalizeMode::replay;
  if (s == "adopt") return FinalizeMode::adopt;
  return std::nullopt;
}

FinalizeOutcome finalize(const FinalityTracker& tracker, FinalizedChain& chain,
                         std::shared_ptr<const chain::Block> block, FinalizeMode mode,
                         std::shared_ptr<const chain::ChainState> adopted_state,
                         const FinalizeHints& hints) {
  if (!tracker.finalized()) {
    throw NotFinalized("candidate has " + std::to_string(tracker.distinct_vendors()) +
                       " distinct vendors");
  }
  const std::uint64_t h = block->header.height;
  if (h != chain.height() + 1) {
    throw AlreadyFinalized("cannot finalize height " + std::to_string(h) + " on a chain at height " +
                           std::to_string(chain.height()));
  }
  const HashAlgorithm alg = chain.hash_algorithm();
  if (block->header.parent_hash != chain.head_hash()) {
    throw CommitmentMismatch("block parent does not match the finalized head");
  }
  const Digest32 commitment = hints.commitment.value_or(chain::block_commitment(*block, alg));
  if (commitment != tracker.candidate()) {
    throw CommitmentMismatch("tracker followed a different candidate");
  }

  FinalizeOutcome out;
  chain::BatchResult local;
  const chain::BatchResult* replay = hints.replay;
  if (replay == nullptr) {
    local = chain::apply_batch_report(*chain.state(), block->body.transactions);
    replay = &local;
  }
  out.replay_commitment =
      hints.replay_commitment.value_or(chain::state_commitment(replay->state, alg));
  out.skipped = replay->skipped;

  if (adopted_state) {
    out.adopted_commitment =
        hints.adopted_commitment.value_or(chain::state_commitment(*adopted_state, alg));
    out.paths_agree = *out.adopted_commitment == out.replay_commitment;
  }
  std::shared_ptr<const chain::ChainState> next;
  if (mode == FinalizeMode::adopt) {
    if (!adopted_state || *out.adopted_commitment != block->header.state_root) {
      throw CommitmentMismatch("adopted state does not match state_root");
    }
    next = std::move(adopted_state);
  } else if (replay == &local) {
    next = std::make_shared<const chain::ChainState>(std::move(local.state));
  } else {
    next = std::make_shared<const chain::ChainState>(replay->state);
  }

  const Digest32 hash = hints.block_hash.value_or(chain::block_hash(*block, alg));
  FinalizeAccess::entries(chain).push_back({std::move(block), hash, tracker.certificate()});
  FinalizeAccess::state(chain) = std::move(next);
  return out;
}

RoundContext make_round_context(const Digest32& parent_hash, std::uint64_t height,
                                const selection::EnclaveRoster& roster,
                                const attestation::VendorRegistry& registry) {
  const auto seed = selection::derive_seed(parent_hash, height, registry.hash_algorithm());
  return {height, registry.chain_id(), seed.value, parent_hash,
          selection::select_proposer(seed, roster, registry.hash_algorithm())};
}

RoundContext make_round_context(const FinalizedChain& chain, const selection::EnclaveRoster& roster,
                                const attestation::VendorRegistry& registry) {
  return make_round_context(chain.head_hash(), chain.height() + 1, roster, registry);
}

}  // namespace pote::validation
