/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pote/attestation.hpp"
#include "pote/chain.hpp"
#include "pote/selection.hpp"

// Block acceptance pipeline and vendor-diverse finality.
namespace pote::validation {

struct RoundContext {
  std::uint64_t expected_height = 0;
  std::uint64_t chain_id = 0;
  Digest32 expected_nonce;
  Digest32 expected_parent_hash;
  selection::EnclaveRef expected_proposer;

  bool operator==(const RoundContext&) const = default;
};

enum class RejectReason : std::uint8_t {
  malformed,
  bad_parent,
  wrong_proposer,
  attestation_invalid,
  commitment_mismatch,
  signature_invalid,
  freshness_violation,
};

inline constexpr std::size_t kRejectReasonCount = 7;

std::string_view to_string(RejectReason reason);
std::optional<RejectReason> reject_reason_from_string(std::string_view s);

struct ValidationVerdict {
  bool accepted = false;
  RejectReason reason = RejectReason::malformed;  // meaningful only when !accepted
  /// Outcome of verify_quote when the pipeline got that far.
  std::optional<attestation::VerifyOutcome> quote_outcome;

  static ValidationVerdict accept() { return {true, RejectReason::malformed, attestation::VerifyOutcome::ok}; }
  static ValidationVerdict reject(RejectReason r) { return {false, r, std::nullopt}; }

  /// "accept" or "reject(<reason>)".
  [[nodiscard]] std::string to_string() const;
};

/// Checks, in order: decodes (block and embedded quote), parent and height,
/// elected proposer, quote verification and binding to the header, commitment,
/// enclave signature, quote freshness. The first failure is reported.
ValidationVerdict validate_block(ByteView encoded_block, const attestation::VendorRegistry& registry,
                                 const RoundContext& ctx,
                                 attestation::QuoteVerifyCache* cache = nullptr);
ValidationVerdict validate_block(const chain::Block& block,
                                 const attestation::VendorRegistry& registry,
                                 const RoundContext& ctx,
                                 attestation::QuoteVerifyCache* cache = nullptr);

struct ReAttestation {
  attestation::VendorId vendor_id;
  attestation::AttestationQuote quote;
  std::uint32_t validator = 0;
};

/// The validator's enclave re-executes the batch on `parent_state` and, if the
/// result matches the block's state_root, asks its vendor for a quote over the
/// same commitment, height, chain_id and nonce. Throws StateTransitionMismatch
/// on divergence and propagates MeasurementRejected.
ReAttestation produce_reattestation(const chain::Block& block,
                                    const attestation::EnclaveIdentity& validator_enclave,
                                    std::uint32_t validator_id,
                                    const attestation::VendorAuthority& authority,
                                    const RoundContext& ctx, const chain::ChainState& parent_state,
                                    HashAlgorithm alg = HashAlgorithm::sha256,
                                    std::optional<Digest32> measurement = std::nullopt);

struct FinalityCertificate {
  Digest32 commitment;
  std::vector<attestation::AttestationQuote> quotes;

  void encode_to(codec::Writer& w) const;
  static FinalityCertificate decode_from(codec::Reader& r);
  bool operator==(const FinalityCertificate&) const = default;
};

class FinalityTracker {
 public:
  FinalityTracker(const Digest32& candidate, const RoundContext& ctx, std::uint32_t k);

  /// Throws CommitmentMismatch for another candidate's attestation and
  /// InvalidQuote when the quote fails verification or carries another round's
  /// height, chain_id or nonce.
  void record_attestation(const ReAttestation& att, const attestation::VendorRegistry& registry,
                          attestation::QuoteVerifyCache* cache = nullptr);

  [[nodiscard]] const Digest32& candidate() const { return candidate_; }
  [[nodiscard]] std::size_t distinct_vendors() const { return collected_.size(); }
  [[nodiscard]] std::size_t attestation_count() const { return count_; }
  [[nodiscard]] bool finalized() const { return collected_.size() >= k_; }
  [[nodiscard]] bool has_vendor(attestation::VendorId v) const { return collected_.contains(v); }

  /// First quote per vendor, ascending vendor id.
  [[nodiscard]] FinalityCertificate certificate() const;

 private:
  Digest32 candidate_;
  RoundContext ctx_;
  std::uint32_t k_;
  std::map<attestation::VendorId, std::vector<ReAttestation>> collected_;
  std::size_t count_ = 0;
};

struct CertificateCheck {
  bool ok = false;
  std::string reason;
};

/// Standalone check: every quote verifies, binds the block's commitment and the
/// context's height/chain_id/nonce, and the quotes span at least k vendors.
CertificateCheck verify_certificate(const FinalityCertificate& cert, const chain::Block& block,
                                    const attestation::VendorRegistry& registry,
                                    const RoundContext& ctx);

struct FinalizedEntry {
  std::shared_ptr<const chain::Block> block;
  Digest32 hash;
  FinalityCertificate certificate;
};

class FinalizedChain {
 public:
  FinalizedChain(const chain::Block& genesis, const chain::ChainState& genesis_state,
                 HashAlgorithm alg = HashAlgorithm::sha256);

  [[nodiscard]] std::uint64_t height() const { return entries_.back().block->header.height; }
  [[nodiscard]] const chain::Block& head() const { return *entries_.back().block; }
  [[nodiscard]] const Digest32& head_hash() const { return entries_.back().hash; }
  [[nodiscard]] const std::shared_ptr<const chain::ChainState>& state() const { return state_; }
  [[nodiscard]] const FinalizedEntry& at(std::uint64_t h) const { return entries_.at(h); }
  [[nodiscard]] HashAlgorithm hash_algorithm() const { return alg_; }

 private:
  friend struct FinalizeAccess;
  std::vector<FinalizedEntry> entries_;
  std::shared_ptr<const chain::ChainState> state_;
  HashAlgorithm alg_;
};

enum class FinalizeMode : std::uint8_t { replay, adopt };

std::string_view to_string(FinalizeMode mode);
std::optional<FinalizeMode> finalize_mode_from_string(std::string_view s);

struct FinalizeOutcome {
  Digest32 replay_commitment;
  /// Commitment of the adopted state, when one was supplied.
  std::optional<Digest32> adopted_commitment;
  bool paths_agree = true;
  std::vector<bool> skipped;
};

// Values finalize would otherwise compute itself. Callers that finalize one
// block on many chains (the simulator) compute them once and pass them in.
struct FinalizeHints {
  const chain::BatchResult* replay = nullptr;
  std::optional<Digest32> replay_commitment;
  std::optional<Digest32> adopted_commitment;
  std::optional<Digest32> commitment;
  std::optional<Digest32> block_hash;
};

/// Appends `block` and advances the state. Replay always runs; in adopt mode
/// the supplied post-state becomes the new state once its commitment matches
/// the block's state_root (else CommitmentMismatch). Throws NotFinalized,
/// AlreadyFinalized for a height that is not head+1, and CommitmentMismatch if
/// the tracker followed another candidate or the parent hash is wrong.
FinalizeOutcome finalize(const FinalityTracker& tracker, FinalizedChain& chain,
                         std::shared_ptr<const chain::Block> block, FinalizeMode mode,
                         std::shared_ptr<const chain::ChainState> adopted_state = nullptr,
                         const FinalizeHints& hints = {});

/// Context for head+1: parent = head hash, nonce = round seed, proposer
/// elected from the roster.
RoundContext make_round_context(const FinalizedChain& chain, const selection::EnclaveRoster& roster,
                                const attestation::VendorRegistry& registry);

/// Same for an arbitrary parent (used to judge blocks for past heights).
RoundContext make_round_context(const Digest32& parent_hash, std::uint64_t height,
                                const selection::EnclaveRoster& roster,
                                const attestation::VendorRegistry& registry);

}  // namespace pote::validation
