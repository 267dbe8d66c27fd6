/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/chain.hpp"

#include <limits>

namespace pote::chain {

namespace {

constexpr std::size_t kAccountEncodedSize = 32 + 8 + 8;

std::uint32_t checked_count(std::size_t n, std::string_view what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw VariableFieldTooLong(std::string(what) + " count exceeds 32 bits");
  }
  return static_cast<std::uint32_t>(n);
}

void encode_txs(codec::Writer& w, const std::vector<Transaction>& txs) {
  w.u32(checked_count(txs.size(), "transaction"));
  for (const auto& tx : txs) tx.encode_to(w);
}

std::vector<Transaction> decode_txs(codec::Reader& r) {
  const std::uint32_t count = r.u32();
  if (static_cast<std::uint64_t>(count) * Transaction::kEncodedSize > r.remaining()) {
    throw MalformedEncoding("transaction count " + std::to_string(count) +
                            " exceeds remaining input");
  }
  std::vector<Transaction> txs;
  txs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) txs.push_back(Transaction::decode_from(r));
  return txs;
}

}  // namespace

AccountId AccountId::from_index(std::uint64_t n) {
  codec::Writer w;
  const std::string_view tag = "POTE_ACCOUNT";
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size())).u64(n);
  AccountId id;
  id.bytes = hash(w.bytes()).bytes();
  return id;
}

void Transaction::encode_to(codec::Writer& w) const {
  w.raw(from.view()).raw(to.view()).u64(amount).u64(tx_nonce);
}

Transaction Transaction::decode_from(codec::Reader& r) {
  Transaction tx;
  tx.from.bytes = r.fixed<32>();
  tx.to.bytes = r.fixed<32>();
  tx.amount = r.u64();
  tx.tx_nonce = r.u64();
  return tx;
}

void TransactionList::encode_to(codec::Writer& w) const { encode_txs(w, items); }

TransactionList TransactionList::decode_from(codec::Reader& r) { return {decode_txs(r)}; }

const Account* ChainState::find(const AccountId& id) const {
  auto it = accounts_.find(id);
  return it == accounts_.end() ? nullptr : &it->second;
}

std::uint64_t ChainState::total_balance() const {
  std::uint64_t total = 0;
  for (const auto& [id, acct] : accounts_) {
    if (acct.balance > std::numeric_limits<std::uint64_t>::max() - total) {
      throw ConfigInvalid("total balance overflows 64 bits");
    }
    total += acct.balance;
  }
  return total;
}

void ChainState::encode_to(codec::Writer& w) const {
  w.u32(checked_count(accounts_.size(), "account"));
  for (const auto& [id, acct] : accounts_) {
    w.raw(id.view()).u64(acct.balance).u64(acct.next_nonce);
  }
}

ChainState ChainState::decode_from(codec::Reader& r) {
  const std::uint32_t count = r.u32();
  if (static_cast<std::uint64_t>(count) * kAccountEncodedSize > r.remaining()) {
    throw MalformedEncoding("account count " + std::to_string(count) + " exceeds remaining input");
  }
  ChainState s;
  std::optional<AccountId> prev;
  for (std::uint32_t i = 0; i < count; ++i) {
    AccountId id;
    id.bytes = r.fixed<32>();
    if (prev && !(*prev < id)) {
      throw MalformedEncoding("accounts not in strictly ascending order at index " +
                              std::to_string(i));
    }
    Account a;
    a.balance = r.u64();
    a.next_nonce = r.u64();
    s.accounts_.emplace_hint(s.accounts_.end(), id, a);
    prev = id;
  }
  return s;
}

void ProgramDescriptor::encode_to(codec::Writer& w) const {
  w.var(ByteView(reinterpret_cast<const std::uint8_t*>(name.data()), name.size()), kMaxNameBytes,
        "program name");
  w.u32(version).u64(rule_flags);
}

ProgramDescriptor ProgramDescriptor::decode_from(codec::Reader& r) {
  ProgramDescriptor d;
  auto name = r.var(kMaxNameBytes, "program name");
  d.name.assign(name.begin(), name.end());
  d.version = r.u32();
  d.rule_flags = r.u64();
  return d;
}

ProgramDescriptor canonical_program() { return {"pote-ledger", 1, 0}; }

Digest32 measure_program(const ProgramDescriptor& descriptor, HashAlgorithm alg) {
  return codec::hash_of(descriptor, alg);
}

void BlockHeader::encode_to(codec::Writer& w) const {
  w.digest(parent_hash).digest(state_root).digest(tx_root);
  w.u64(timestamp_ms).u64(height).u64(chain_id);
  w.raw(proposer_pubkey.view()).u8(tee_vendor_id.value);
  w.var(attestation_quote, codec::kMaxQuoteBytes, "attestation_quote");
  w.var(enclave_signature, codec::kMaxEnclaveSignatureBytes, "enclave_signature");
}

BlockHeader BlockHeader::decode_from(codec::Reader& r) {
  BlockHeader h;
  h.parent_hash = r.digest();
  h.state_root = r.digest();
  h.tx_root = r.digest();
  h.timestamp_ms = r.u64();
  h.height = r.u64();
  h.chain_id = r.u64();
  h.proposer_pubkey.bytes = r.fixed<crypto::kPublicKeySize>();
  h.tee_vendor_id = attestation::VendorId{r.u8()};
  h.attestation_quote = r.var(codec::kMaxQuoteBytes, "attestation_quote");
  h.enclave_signature = r.var(codec::kMaxEnclaveSignatureBytes, "enclave_signature");
  return h;
}

void BlockBody::encode_to(codec::Writer& w) const {
  encode_txs(w, transactions);
  w.digest(post_state_commitment);
}

BlockBody BlockBody::decode_from(codec::Reader& r) {
  BlockBody b;
  b.transactions = decode_txs(r);
  b.post_state_commitment = r.digest();
  return b;
}

Block Block::committed_view() const {
  Block b = *this;
  b.header.attestation_quote.clear();
  b.header.enclave_signature.clear();
  return b;
}

Block Block::signed_view() const {
  Block b = *this;
  b.header.enclave_signature.clear();
  return b;
}

void Block::encode_to(codec::Writer& w) const {
  header.encode_to(w);
  body.encode_to(w);
}

Block Block::decode_from(codec::Reader& r) {
  Block b;
  b.header = BlockHeader::decode_from(r);
  b.body = BlockBody::decode_from(r);
  return b;
}

std::size_t BatchResult::skipped_count() const {
  std::size_t n = 0;
  for (bool s : skipped) n += s ? 1 : 0;
  return n;
}

BatchResult apply_batch_report(const ChainState& state, const std::vector<Transaction>& txs) {
  BatchResult out{state, std::vector<bool>(txs.size(), false)};
  ChainState& s = out.state;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const Transaction& tx = txs[i];
    const Account* sender = s.find(tx.from);
    if (sender == nullptr || sender->next_nonce != tx.tx_nonce || sender->balance < tx.amount) {
      out.skipped[i] = true;
      continue;
    }
    Account from = *sender;
    from.next_nonce += 1;
    if (tx.from == tx.to) {
      s.set_account(tx.from, from);  // balance unchanged
      continue;
    }
    from.balance -= tx.amount;
    const Account* receiver = s.find(tx.to);
    Account to = receiver ? *receiver : Account{};
    if (to.balance > std::numeric_limits<std::uint64_t>::max() - tx.amount) {
      out.skipped[i] = true;
      continue;
    }
    to.balance += tx.amount;
    s.set_account(tx.from, from);
    s.set_account(tx.to, to);
  }
  return out;
}

ChainState apply_batch(const ChainState& state, const std::vector<Transaction>& txs) {
  return apply_batch_report(state, txs).state;
}

Digest32 state_commitment(const ChainState& state, HashAlgorithm alg) {
  return codec::hash_of(state, alg);
}

Digest32 tx_root(const std::vector<Transaction>& txs, HashAlgorithm alg) {
  codec::Writer w;
  encode_txs(w, txs);
  return hash(w.bytes(), alg);
}

Block genesis_block(std::uint64_t chain_id, const ChainState& genesis_state, HashAlgorithm alg) {
  Block g;
  g.header.chain_id = chain_id;
  g.header.state_root = state_commitment(genesis_state, alg);
  g.header.tx_root = tx_root({}, alg);
  g.body.post_state_commitment = g.header.state_root;
  return g;
}

Block build_block(const Block& parent, const ChainState& state, std::vector<Transaction> txs,
                  std::uint64_t timestamp_ms, const attestation::EnclaveIdentity& proposer,
                  const attestation::VendorRegistry& registry) {
  const HashAlgorithm alg = registry.hash_algorithm();
  Block b;
  b.header.parent_hash = block_hash(parent, alg);
  b.header.tx_root = tx_root(txs, alg);
  b.header.timestamp_ms = timestamp_ms;
  b.header.height = parent.header.height + 1;
  b.header.chain_id = registry.chain_id();
  b.header.proposer_pubkey = proposer.block_keypair.public_key;
  b.header.tee_vendor_id = proposer.vendor_id;
  b.body.post_state_commitment = state_commitment(apply_batch(state, txs), alg);
  b.header.state_root = b.body.post_state_commitment;
  b.body.transactions = std::move(txs);
  return b;
}

Digest32 block_commitment(const Block& block, HashAlgorithm alg) {
  return codec::hash_of(block.committed_view(), alg);
}

attestation::QuoteUserData quote_user_data(const Block& block, const crypto::PublicKey& pk_block,
                                           const Digest32& nonce, HashAlgorithm alg) {
  return {pk_block, block_commitment(block, alg), block.header.height, block.header.chain_id,
          nonce};
}

void sign_block(Block& block, const attestation::EnclaveIdentity& proposer) {
  block.header.enclave_signature.clear();
  auto sig = crypto::sign(proposer.block_keypair.secret_key, codec::encode(block));
  block.header.enclave_signature.assign(sig.bytes.begin(), sig.bytes.end());
}

Block seal_block(Block block, const attestation::EnclaveIdentity& proposer,
                 const attestation::VendorAuthority& authority, const Digest32& nonce,
                 HashAlgorithm alg, std::optional<Digest32> measurement) {
  auto user_data = quote_user_data(block, proposer.block_keypair.public_key, nonce, alg);
  auto quote = attestation::issue_quote(
      authority, measurement.value_or(authority.canonical_measurement), user_data);
  block.header.attestation_quote = codec::encode(quote);
  sign_block(block, proposer);
  return block;
}

Digest32 block_hash(const Block& block, HashAlgorithm alg) { return codec::hash_of(block, alg); }

}  // namespace pote::chain
