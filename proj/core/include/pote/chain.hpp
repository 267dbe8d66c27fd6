/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pote/attestation.hpp"
#include "pote/codec.hpp"
#include "pote/crypto.hpp"

// The canonical program: a flat account ledger, its measurement, and block
// assembly/sealing/hashing.
namespace pote::chain {

struct AccountId {
  std::array<std::uint8_t, 32> bytes{};

  [[nodiscard]] ByteView view() const { return {bytes.data(), bytes.size()}; }
  [[nodiscard]] std::string to_hex() const { return pote::to_hex(view()); }
  /// Convenience for fixtures and workloads: id = SHA-256("POTE_ACCOUNT" ∥ n LE8).
  static AccountId from_index(std::uint64_t n);

  auto operator<=>(const AccountId&) const = default;
};

struct Transaction {
  AccountId from;
  AccountId to;
  std::uint64_t amount = 0;
  std::uint64_t tx_nonce = 0;

  static constexpr std::size_t kEncodedSize = 80;

  void encode_to(codec::Writer& w) const;
  static Transaction decode_from(codec::Reader& r);
  auto operator<=>(const Transaction&) const = default;
};

/// Encodes as tx_count (u32) followed by the transactions.
struct TransactionList {
  std::vector<Transaction> items;

  void encode_to(codec::Writer& w) const;
  static TransactionList decode_from(codec::Reader& r);
  bool operator==(const TransactionList&) const = default;
};

struct Account {
  std::uint64_t balance = 0;
  std::uint64_t next_nonce = 0;

  bool operator==(const Account&) const = default;
};

class ChainState {
 public:
  ChainState() = default;

  void set_account(const AccountId& id, Account account) { accounts_[id] = account; }
  [[nodiscard]] const Account* find(const AccountId& id) const;
  [[nodiscard]] const std::map<AccountId, Account>& accounts() const { return accounts_; }
  [[nodiscard]] std::size_t size() const { return accounts_.size(); }

  /// Sum of all balances. Throws ConfigInvalid if it does not fit in 64 bits,
  /// which can only happen for a hand-written genesis.
  [[nodiscard]] std::uint64_t total_balance() const;

  /// count (u32) ∥ (id 32 ∥ balance 8 ∥ next_nonce 8)* in ascending id order.
  void encode_to(codec::Writer& w) const;
  static ChainState decode_from(codec::Reader& r);

  bool operator==(const ChainState&) const = default;

 private:
  std::map<AccountId, Account> accounts_;
};

struct ProgramDescriptor {
  std::string name;
  std::uint32_t version = 0;
  std::uint64_t rule_flags = 0;

  static constexpr std::size_t kMaxNameBytes = 64;

  void encode_to(codec::Writer& w) const;
  static ProgramDescriptor decode_from(codec::Reader& r);
  bool operator==(const ProgramDescriptor&) const = default;
};

/// The descriptor every simulation runs: ("pote-ledger", 1, 0).
ProgramDescriptor canonical_program();

Digest32 measure_program(const ProgramDescriptor& descriptor,
                         HashAlgorithm alg = HashAlgorithm::sha256);

struct BlockHeader {
  Digest32 parent_hash;
  Digest32 state_root;
  Digest32 tx_root;
  std::uint64_t timestamp_ms = 0;
  std::uint64_t height = 0;
  std::uint64_t chain_id = 0;
  crypto::PublicKey proposer_pubkey;
  attestation::VendorId tee_vendor_id;
  Bytes attestation_quote;
  Bytes enclave_signature;

  void encode_to(codec::Writer& w) const;
  static BlockHeader decode_from(codec::Reader& r);
  bool operator==(const BlockHeader&) const = default;
};

struct BlockBody {
  std::vector<Transaction> transactions;
  Digest32 post_state_commitment;

  void encode_to(codec::Writer& w) const;
  static BlockBody decode_from(codec::Reader& r);
  bool operator==(const BlockBody&) const = default;
};

struct Block {
  BlockHeader header;
  BlockBody body;

  /// Copy with attestation_quote and enclave_signature emptied.
  [[nodiscard]] Block committed_view() const;
  /// Copy with only enclave_signature emptied.
  [[nodiscard]] Block signed_view() const;

  void encode_to(codec::Writer& w) const;
  static Block decode_from(codec::Reader& r);
  bool operator==(const Block&) const = default;
};

struct BatchResult {
  ChainState state;
  /// One entry per input transaction; true where the transaction was skipped.
  std::vector<bool> skipped;

  [[nodiscard]] std::size_t skipped_count() const;
};

/// Applies txs in order. A transaction applies iff the sender exists, the
/// nonce matches, the balance covers the amount and the credit does not
/// overflow the receiver; otherwise it is skipped.
BatchResult apply_batch_report(const ChainState& state, const std::vector<Transaction>& txs);
ChainState apply_batch(const ChainState& state, const std::vector<Transaction>& txs);

Digest32 state_commitment(const ChainState& state, HashAlgorithm alg = HashAlgorithm::sha256);
Digest32 tx_root(const std::vector<Transaction>& txs, HashAlgorithm alg = HashAlgorithm::sha256);

/// Height-0 block: zero parent, empty batch, state_root of the genesis state,
/// no proposer, vendor 0, empty quote and signature.
Block genesis_block(std::uint64_t chain_id, const ChainState& genesis_state,
                    HashAlgorithm alg = HashAlgorithm::sha256);

/// Unsealed successor of `parent`. `state` is the parent's post-state; the
/// batch is applied to compute state_root.
Block build_block(const Block& parent, const ChainState& state, std::vector<Transaction> txs,
                  std::uint64_t timestamp_ms, const attestation::EnclaveIdentity& proposer,
                  const attestation::VendorRegistry& registry);

/// hash(encode(block with quote and signature blanked)).
Digest32 block_commitment(const Block& block, HashAlgorithm alg = HashAlgorithm::sha256);

/// User data the proposer enclave asks its vendor to bind for `block`.
attestation::QuoteUserData quote_user_data(const Block& block, const crypto::PublicKey& pk_block,
                                           const Digest32& nonce, HashAlgorithm alg);

/// Embeds σ over the quote-embedded block. Used by seal_block and by hosts
/// that re-sign after substituting a quote.
void sign_block(Block& block, const attestation::EnclaveIdentity& proposer);

/// Issues the proposer's quote (measurement defaults to the authority's
/// canonical one) and signs the quote-embedded block. Propagates
/// MeasurementRejected.
Block seal_block(Block block, const attestation::EnclaveIdentity& proposer,
                 const attestation::VendorAuthority& authority, const Digest32& nonce,
                 HashAlgorithm alg = HashAlgorithm::sha256,
                 std::optional<Digest32> measurement = std::nullopt);

Digest32 block_hash(const Block& block, HashAlgorithm alg = HashAlgorithm::sha256);

}  // namespace pote::chain
