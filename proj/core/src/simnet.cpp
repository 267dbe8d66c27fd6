/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <variant>

#include "pote/prng.hpp"

namespace pote::sim {

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  hash += o.hash;
  sign += o.sign;
  verify += o.verify;
  quote_issue += o.quote_issue;
  quote_verify += o.quote_verify;
  return *this;
}

std::size_t SimResult::stalled_rounds() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const RoundRecord& r) { return r.stalled; }));
}

namespace {

using Clock = std::int64_t;  // simulated microseconds
using BlockPtr = std::shared_ptr<const chain::Block>;
using StatePtr = std::shared_ptr<const chain::ChainState>;
using validation::RejectReason;

Clock to_us(double ms) { return static_cast<Clock>(std::llround(ms * 1000.0)); }

struct Proposal {
  std::uint64_t record = 0;
  BlockPtr block;
  StatePtr post_state;
  bool adversarial = false;
  bool forged = false;
  std::uint32_t sender = 0;
  /// Set on first delivery; kept when the proposal waits for its height.
  std::int64_t received_at = -1;
};

struct ReAttMsg {
  std::uint64_t height = 0;
  validation::ReAttestation att;
};

struct SyncRequest {
  std::uint64_t height = 0;
};

struct SyncResponse {
  std::uint64_t height = 0;
  BlockPtr block;
  validation::FinalityCertificate cert;
  StatePtr post_state;
};

using Message = std::variant<Proposal, ReAttMsg, SyncRequest, SyncResponse>;

struct Deliver {
  std::uint32_t from;
  std::uint32_t to;
  Message msg;
};
struct ProposalChecked {
  std::uint32_t node;
  Proposal p;
  validation::ValidationVerdict verdict;
  Clock delivered;
  bool past;
};
struct Reexecuted {
  std::uint32_t node;
  std::uint64_t height;
};
struct OwnQuoteReady {
  std::uint32_t node;
  std::uint64_t height;
  validation::ReAttestation att;
};
struct AttestationChecked {
  std::uint32_t node;
  ReAttMsg m;
  bool own;
};
struct SyncChecked {
  std::uint32_t node;
  SyncResponse r;
};
struct ProposerExecuted {
  std::uint32_t node;
  std::uint64_t record;
};
struct ProposerSealed {
  std::uint32_t node;
  std::uint64_t record;
};
struct ProposerReady {
  std::uint32_t node;
  std::uint64_t record;
};
struct Timer {
  std::uint32_t node;
  std::uint64_t height;
};
struct RoundStart {
  std::uint32_t node;
  std::uint64_t height;
};
struct VendorTick {
  std::uint8_t vendor;
  std::uint64_t version;
};

using Payload = std::variant<Deliver, ProposalChecked, Reexecuted, OwnQuoteReady,
                             AttestationChecked, SyncChecked, ProposerExecuted, ProposerSealed,
                             ProposerReady, Timer, RoundStart, VendorTick>;

struct Event {
  Clock t;
  std::uint64_t seq;
  Payload payload;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
  }
};

struct HeightView {
  BlockPtr candidate;
  StatePtr post_state;
  bool forged = false;
  std::uint64_t record = 0;
  std::uint32_t proposer = 0;
  std::optional<validation::FinalityTracker> tracker;
  std::optional<validation::ReAttestation> own_att;
  bool own_attested = false;
  bool shadow_finalized = false;
  Clock observed = kNever;
  std::vector<validation::ReAttestation> early;
  std::vector<Proposal> deferred;
  std::set<const chain::Block*> seen;
  std::set<std::uint32_t> voters;
  std::uint64_t resent_for_record = 0;
};

struct Node {
  Node(std::uint32_t i, bool c, validation::FinalizedChain ch)
      : id(i), colluder(c), chain(std::move(ch)) {}

  std::uint32_t id = 0;
  bool colluder = false;
  validation::FinalizedChain chain;
  Clock cpu_free = 0;
  std::map<std::uint64_t, HeightView> heights;
  OpCounters ops;
  bool last_timer_used = false;
};

// Work a proposer carries from execution to broadcast.
struct ProposerJob {
  std::uint32_t node = 0;
  std::uint64_t height = 0;
  validation::RoundContext ctx;
  chain::Block unsealed;
  std::shared_ptr<const chain::BatchResult> batch;
  StatePtr post_state;
  bool forged = false;
};

struct Sealed {
  BlockPtr block;
  StatePtr post_state;
  bool forged = false;
  std::shared_ptr<const chain::BatchResult> batch;
};

struct BlockInfo {
  Digest32 hash;
  Digest32 commitment;
};

// A vendor's quoting host shares its capacity equally among the requests in
// service (processor sharing), so every quote slows down as load grows.
struct QuoteJob {
  double remaining_us;
  std::uint64_t id;
  Payload done;
};

struct VendorService {
  std::vector<QuoteJob> active;
  std::int64_t last_update = 0;
  std::uint64_t version = 0;
};

struct Replay {
  chain::BatchResult result;
  Digest32 commitment;
};

enum class Stage { none, attestation, commitment, signature, all };

Stage stage_reached(const validation::ValidationVerdict& v) {
  if (v.accepted) return Stage::all;
  switch (v.reason) {
    case RejectReason::malformed:
    case RejectReason::bad_parent:
    case RejectReason::wrong_proposer: return Stage::none;
    case RejectReason::attestation_invalid: return Stage::attestation;
    case RejectReason::commitment_mismatch: return Stage::commitment;
    case RejectReason::signature_invalid: return Stage::signature;
    case RejectReason::freshness_violation: return Stage::all;
  }
  return Stage::none;
}

chain::AccountId attacker_account() { return chain::AccountId::from_index(0xFFFF'FFFF'FFFFULL); }

class Simulator {
 public:
  Simulator(const Scenario& s, std::uint64_t seed)
      : s_(s),
        seed_(seed),
        world_(build_world(s, seed)),
        alg_(s.ledger.hash_algorithm),
        net_rng_(SplitMix64(seed).fork(1)),
        workload_rng_(SplitMix64(seed).fork(2)),
        services_(s.network.vendors) {
    const auto n = s.network.validators;
    std::set<std::uint8_t> compromised(s.adversary.compromised_vendors.begin(),
                                       s.adversary.compromised_vendors.end());
    nodes_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      nodes_.emplace_back(i, compromised.contains(world_.enclaves[i].vendor_id.value),
                          validation::FinalizedChain(world_.genesis, world_.genesis_state, alg_));
    }
    for (std::uint32_t i = 0; i < s.ledger.accounts; ++i) {
      accounts_.push_back(chain::AccountId::from_index(i));
    }
    genesis_state_ = nodes_.front().chain.state();
    post_state_by_hash_[nodes_.front().chain.head_hash()] = genesis_state_;
    horizon_ = to_us(s.round_timeout_ms) * static_cast<Clock>(s.rounds + 1);
    if (s.protocol == Protocol::slotted) {
      horizon_ += to_us(s.slotted.slot_interval_ms) * static_cast<Clock>(s.rounds + 1);
      votes_needed_ = static_cast<std::size_t>(
          std::ceil(s.slotted.vote_fraction * static_cast<double>(n) - 1e-9));
    }
    k_eff_ = s.protocol == Protocol::pote ? s.network.k : 1;
    endpoints_ = s.delay.colocate_by_vendor ? s.network.vendors : n;
    link_last_.assign(static_cast<std::size_t>(endpoints_) * endpoints_, 0);
  }

  SimResult run() {
    for (auto& node : nodes_) enter_height(node, 1);
    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      now_ = e.t;
      ++events_;
      if (events_ > kMaxEvents) throw Error("simulation exceeded its event budget");
      std::visit([this](auto& p) { handle(p); }, e.payload);
    }
    return finish();
  }

 private:
  static constexpr std::uint64_t kMaxEvents = 200'000'000;

  // ---- plumbing ----

  void schedule(Clock t, Payload p) { queue_.push(Event{t, seq_++, std::move(p)}); }

  void cpu(Node& n, Clock cost, Payload p) {
    const Clock start = std::max(now_, n.cpu_free);
    n.cpu_free = start + cost;
    schedule(n.cpu_free, std::move(p));
  }

  // Delivers `done` once the vendor's quoting host has served the request and
  // the fixed issue latency has passed.
  void request_quote(attestation::VendorId v, Payload done) {
    const double work = s_.delay.attestation_service_ms * 1000.0;
    if (work <= 0) {
      schedule(now_ + to_us(s_.delay.attestation_issue_ms), std::move(done));
      return;
    }
    auto& svc = services_.at(v.value - 1);
    advance(svc);
    svc.active.push_back({work, next_job_++, std::move(done)});
    reschedule(v.value, svc);
  }

  void advance(VendorService& svc) {
    if (!svc.active.empty()) {
      const double share = static_cast<double>(now_ - svc.last_update) /
                           static_cast<double>(svc.active.size());
      for (auto& j : svc.active) j.remaining_us -= share;
    }
    svc.last_update = now_;
  }

  void reschedule(std::uint8_t vendor, VendorService& svc) {
    ++svc.version;
    if (svc.active.empty()) return;
    double least = svc.active.front().remaining_us;
    for (const auto& j : svc.active) least = std::min(least, j.remaining_us);
    const double wait = std::max(0.0, least) * static_cast<double>(svc.active.size());
    schedule(now_ + static_cast<Clock>(std::ceil(wait - 1e-6)), VendorTick{vendor, svc.version});
  }

  void handle(VendorTick& e) {
    auto& svc = services_.at(e.vendor - 1);
    if (e.version != svc.version) return;
    advance(svc);
    const Clock ready = now_ + to_us(s_.delay.attestation_issue_ms);
    std::vector<QuoteJob> still;
    for (auto& j : svc.active) {
      if (j.remaining_us <= 1e-6) {
        schedule(ready, std::move(j.done));
      } else {
        still.push_back(std::move(j));
      }
    }
    svc.active = std::move(still);
    reschedule(e.vendor, svc);
  }

  std::uint32_t endpoint(std::uint32_t node) const {
    return s_.delay.colocate_by_vendor ? world_.enclaves[node].vendor_id.value - 1u : node;
  }

  void send(std::uint32_t from, std::uint32_t to, Message msg) {
    const auto a = endpoint(from);
    const auto b = endpoint(to);
    Clock delay = 0;
    if (s_.delay.colocate_by_vendor && a == b) {
      delay = to_us(s_.delay.local_latency_ms);
    } else {
      const double u_drop = net_rng_.unit();
      const double u_delay = net_rng_.unit();
      if (u_drop < s_.delay.drop_probability) {
        ++dropped_;
        return;
      }
      const double ms = s_.delay.base_latency_ms + (2.0 * u_delay - 1.0) * s_.delay.jitter_ms;
      delay = std::max<Clock>(0, to_us(ms));
    }
    // Links are ordered streams: nothing overtakes an earlier message.
    Clock& last = link_last_[static_cast<std::size_t>(a) * endpoints_ + b];
    last = std::max(last, now_ + delay);
    schedule(last, Deliver{from, to, std::move(msg)});
  }

  void broadcast(std::uint32_t from, const Message& msg) {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      if (i != from) send(from, i, msg);
    }
  }

  bool partitioned(std::uint32_t from, std::uint32_t to) const {
    for (const auto& p : s_.delay.partitions) {
      if (now_ < to_us(p.start_ms) || now_ >= to_us(p.end_ms)) continue;
      const bool f = std::find(p.from.begin(), p.from.end(), from) != p.from.end();
      const bool t = std::find(p.to.begin(), p.to.end(), to) != p.to.end();
      if (f && t) return true;
    }
    return false;
  }

  Clock qv_cost() const { return to_us(s_.delay.quote_verify_ms); }

  Clock exec_cost(std::size_t txs) const {
    return to_us(s_.delay.exec_ms_per_100tx * static_cast<double>(txs) / 100.0);
  }

  // ---- memoized pure computations ----

  const validation::RoundContext& ctx_for(const Digest32& parent, std::uint64_t height) {
    auto key = std::make_pair(parent, height);
    auto it = ctx_cache_.find(key);
    if (it == ctx_cache_.end()) {
      it = ctx_cache_
               .emplace(key, validation::make_round_context(parent, height, world_.roster,
                                                            world_.registry))
               .first;
    }
    return it->second;
  }

  const BlockInfo& info(const BlockPtr& b) {
    auto it = block_info_.find(b.get());
    if (it == block_info_.end()) {
      keepalive_.push_back(b);
      it = block_info_
               .emplace(b.get(), BlockInfo{chain::block_hash(*b, alg_),
                                           chain::block_commitment(*b, alg_)})
               .first;
    }
    return it->second;
  }

  validation::ValidationVerdict verdict_for(Node& n, const BlockPtr& b,
                                            const validation::RoundContext& ctx) {
    info(b);
    auto key = std::make_tuple(b.get(), ctx.expected_parent_hash, ctx.expected_height);
    auto it = verdicts_.find(key);
    if (it == verdicts_.end()) {
      it = verdicts_.emplace(key, validation::validate_block(*b, world_.registry, ctx, &qcache_))
               .first;
    }
    const Stage st = stage_reached(it->second);
    if (st >= Stage::attestation) ++n.ops.quote_verify;
    if (st >= Stage::commitment) ++n.ops.hash;
    if (st >= Stage::signature) ++n.ops.verify;
    return it->second;
  }

  const Replay& replay_for(const BlockPtr& b, const StatePtr& parent_state,
                           const Digest32& parent_root) {
    info(b);
    auto key = std::make_pair(b.get(), parent_root);
    auto it = replays_.find(key);
    if (it == replays_.end()) {
      auto result = chain::apply_batch_report(*parent_state, b->body.transactions);
      auto commitment = chain::state_commitment(result.state, alg_);
      it = replays_.emplace(key, Replay{std::move(result), commitment}).first;
    }
    return it->second;
  }

  const Digest32& state_commitment_of(const StatePtr& s) {
    auto it = state_commitments_.find(s.get());
    if (it == state_commitments_.end()) {
      state_keepalive_.push_back(s);
      it = state_commitments_.emplace(s.get(), chain::state_commitment(*s, alg_)).first;
    }
    return it->second;
  }

  // ---- workload ----

  std::vector<chain::Transaction> make_batch(const chain::ChainState& state, std::uint64_t height) {
    std::vector<chain::Transaction> txs;
    if (accounts_.size() < 2) return txs;
    SplitMix64 rng = workload_rng_.fork(height);
    std::map<chain::AccountId, std::uint64_t> next_nonce;
    txs.reserve(s_.tx_per_block);
    for (std::uint32_t i = 0; i < s_.tx_per_block; ++i) {
      const auto from_i = rng.uniform(accounts_.size());
      auto to_i = rng.uniform(accounts_.size() - 1);
      if (to_i >= from_i) ++to_i;
      const auto& from = accounts_[from_i];
      auto [it, fresh] = next_nonce.try_emplace(from, 0);
      if (fresh) {
        const auto* a = state.find(from);
        it->second = a ? a->next_nonce : 0;
      }
      chain::Transaction tx{from, accounts_[to_i], 1 + rng.uniform(100), it->second};
      // A small share of transactions carry a stale nonce and get skipped.
      if (rng.uniform(50) == 0) {
        tx.tx_nonce += 7;
      } else {
        ++it->second;
      }
      txs.push_back(tx);
    }
    return txs;
  }

  // ---- records ----

  std::uint64_t new_record(std::uint32_t proposer, std::uint64_t height) {
    RoundRecord r;
    r.round = ++rounds_started_;
    r.height = height;
    r.attempt = ++attempts_[height];
    r.proposer = proposer;
    r.proposer_vendor = world_.enclaves[proposer].vendor_id.value;
    r.t_start_us = now_;
    const auto n = nodes_.size();
    r.observed_us.assign(n, kNever);
    r.finalized_us.assign(n, kNever);
    r.via_sync.assign(n, false);
    records_.push_back(std::move(r));
    latest_record_[height] = records_.size() - 1;
    return records_.size() - 1;
  }

  bool budget_left() const { return rounds_started_ < s_.rounds && now_ <= horizon_; }

  // ---- round lifecycle ----

  void enter_height(Node& n, std::uint64_t h) {
    if (now_ + to_us(s_.round_timeout_ms) <= horizon_) {
      schedule(now_ + to_us(s_.round_timeout_ms), Timer{n.id, h});
    }
    const auto& ctx = ctx_for(n.chain.head_hash(), h);
    n.ops.hash += 2;
    if (ctx.expected_proposer.pk_block == world_.enclaves[n.id].block_keypair.public_key) {
      if (s_.protocol == Protocol::slotted) {
        const Clock slot = to_us(s_.slotted.slot_interval_ms) * static_cast<Clock>(h - 1);
        if (slot > now_) {
          schedule(slot, RoundStart{n.id, h});
        } else {
          start_round(n, h);
        }
      } else {
        start_round(n, h);
      }
    }
    auto it = n.heights.find(h);
    if (it != n.heights.end()) {
      auto deferred = std::move(it->second.deferred);
      it->second.deferred.clear();
      for (auto& p : deferred) on_proposal(n, std::move(p));
    }
  }

  void handle(RoundStart& e) {
    Node& n = nodes_[e.node];
    if (n.chain.height() + 1 == e.height) start_round(n, e.height);
  }

  bool forging(const Node& n, std::uint64_t round) const {
    return n.colluder && s_.adversary.f() > 0 && s_.adversary.active(round);
  }

  void start_round(Node& n, std::uint64_t h) {
    if (!budget_left() || sealed_.contains(h)) return;
    const auto rec = new_record(n.id, h);
    ProposerJob job;
    job.node = n.id;
    job.height = h;
    job.ctx = ctx_for(n.chain.head_hash(), h);
    job.forged = forging(n, records_[rec].round);
    const auto& state = *n.chain.state();
    auto txs = make_batch(state, h);
    auto batch = std::make_shared<chain::BatchResult>(chain::apply_batch_report(state, txs));
    job.unsealed = chain::build_block(n.chain.head(), state, std::move(txs), 0, world_.enclaves[n.id],
                                      world_.registry);
    n.ops.hash += 3;
    if (job.forged) {
      chain::ChainState forged = batch->state;
      const auto* a = forged.find(attacker_account());
      chain::Account acct = a ? *a : chain::Account{};
      acct.balance = acct.balance > UINT64_MAX - 1'000'000 ? UINT64_MAX : acct.balance + 1'000'000;
      forged.set_account(attacker_account(), acct);
      job.unsealed.body.post_state_commitment = chain::state_commitment(forged, alg_);
      job.unsealed.header.state_root = job.unsealed.body.post_state_commitment;
      job.post_state = std::make_shared<const chain::ChainState>(std::move(forged));
      n.ops.hash += 1;
    } else {
      job.post_state = std::make_shared<const chain::ChainState>(batch->state);
    }
    job.batch = std::move(batch);
    jobs_[rec] = std::move(job);
    cpu(n, exec_cost(jobs_[rec].unsealed.body.transactions.size()), ProposerExecuted{n.id, rec});
  }

  void handle(ProposerExecuted& e) {
    auto& job = jobs_.at(e.record);
    job.unsealed.header.timestamp_ms = static_cast<std::uint64_t>(now_ / 1000);
    request_quote(world_.enclaves[e.node].vendor_id, ProposerSealed{e.node, e.record});
  }

  void handle(ProposerSealed& e) {
    Node& n = nodes_[e.node];
    auto& job = jobs_.at(e.record);
    const auto& enclave = world_.enclaves[n.id];
    auto sealed = chain::seal_block(job.unsealed, enclave, world_.authority(enclave.vendor_id),
                                    job.ctx.expected_nonce, alg_);
    n.ops.hash += 1;
    n.ops.quote_issue += 1;
    n.ops.sign += 1;
    auto block = std::make_shared<const chain::Block>(std::move(sealed));
    sealed_[job.height] = Sealed{block, job.post_state, job.forged, job.batch};
    post_state_by_block_[block.get()] = job.post_state;
    cpu(n, qv_cost(), ProposerReady{n.id, e.record});
  }

  void handle(ProposerReady& e) {
    Node& n = nodes_[e.node];
    auto job = std::move(jobs_.at(e.record));
    jobs_.erase(e.record);
    const auto& sealed = sealed_.at(job.height);
    const auto verdict = verdict_for(n, sealed.block, job.ctx);
    if (!verdict.accepted) {
      throw Error("proposer " + std::to_string(n.id) + " produced a block it rejects: " +
                  verdict.to_string());
    }
    auto& rec = records_[e.record];
    rec.tx_count = static_cast<std::uint32_t>(sealed.block->body.transactions.size());
    rec.skipped = sealed.batch->skipped;
    rec.block_hash = info(sealed.block).hash;

    // The proposer's own quote is the first vendor toward the threshold.
    HeightView& hv = n.heights[job.height];
    adopt_candidate(n, hv, sealed.block, sealed.post_state, sealed.forged, e.record, n.id, job.ctx);
    hv.observed = now_;
    hv.own_attested = true;
    rec.observed_us[n.id] = now_;
    propose(n, e.record);
    check_finalize(n, job.height);
  }

  // Broadcasts the sealed block for the record's height, through the
  // adversary transform when one is active.
  void propose(Node& n, std::uint64_t rec_index) {
    auto& rec = records_[rec_index];
    const auto& sealed = sealed_.at(rec.height);
    rec.t_proposed_us = now_;
    if (rec.tx_count == 0 && rec.block_hash.is_zero()) {
      rec.tx_count = static_cast<std::uint32_t>(sealed.block->body.transactions.size());
      rec.skipped = sealed.batch->skipped;
      rec.block_hash = info(sealed.block).hash;
    }
    if (sealed.forged) rec.adversary = "forged";

    const auto mode = s_.adversary.active(rec.round) ? s_.adversary.mode : AdversaryMode::none;
    Proposal honest{rec_index, sealed.block, sealed.post_state, false, sealed.forged, n.id};
    switch (mode) {
      case AdversaryMode::none:
        broadcast(n.id, honest);
        break;
      case AdversaryMode::rogue_proposer: {
        broadcast(n.id, honest);
        const std::uint32_t q = (n.id + 1) % static_cast<std::uint32_t>(nodes_.size());
        rec.adversary = std::string(to_string(mode));
        rec.attacker = q;
        broadcast(q, Proposal{rec_index, rogue_block(q, n, rec.height), sealed.post_state, true,
                              false, q});
        break;
      }
      default: {
        rec.adversary = std::string(to_string(mode));
        rec.attacker = n.id;
        broadcast(n.id, Proposal{rec_index, transform(n, mode, sealed.block, rec.height),
                                 sealed.post_state, true, false, n.id});
        break;
      }
    }
  }

  static void alter_body(chain::Block& b) {
    if (!b.body.transactions.empty()) {
      b.body.transactions.front().amount ^= 1;
    } else {
      b.body.post_state_commitment.mutable_bytes()[0] ^= 0x01;
    }
  }

  BlockPtr transform(Node& host, AdversaryMode mode, const BlockPtr& sealed, std::uint64_t h) {
    const auto& enclave = world_.enclaves[host.id];
    const auto& authority = world_.authority(enclave.vendor_id);
    chain::Block b = *sealed;
    switch (mode) {
      case AdversaryMode::tamper_after_attest:
        alter_body(b);
        break;
      case AdversaryMode::keep_quote_alter_block: {
        // Fresh quote over the altered block, but the enclave signature of the
        // original block is kept.
        const auto original_sig = b.header.enclave_signature;
        alter_body(b);
        const auto& ctx = ctx_for(b.header.parent_hash, h);
        auto ud = chain::quote_user_data(b, enclave.block_keypair.public_key, ctx.expected_nonce,
                                         alg_);
        b.header.attestation_quote =
            codec::encode(attestation::issue_quote(authority, authority.canonical_measurement, ud));
        b.header.enclave_signature = original_sig;
        host.ops.hash += 1;
        host.ops.quote_issue += 1;
        break;
      }
      case AdversaryMode::replay_old_quote: {
        // The host feeds the enclave the previous round's metadata.
        Digest32 stale_nonce;
        if (h >= 2) stale_nonce = ctx_for(host.chain.at(h - 2).hash, h - 1).expected_nonce;
        b.header.attestation_quote.clear();
        b.header.enclave_signature.clear();
        auto ud = chain::quote_user_data(b, enclave.block_keypair.public_key, stale_nonce, alg_);
        ud.height = h - 1;
        b.header.attestation_quote =
            codec::encode(attestation::issue_quote(authority, authority.canonical_measurement, ud));
        chain::sign_block(b, enclave);
        host.ops.hash += 1;
        host.ops.quote_issue += 1;
        host.ops.sign += 1;
        break;
      }
      default:
        break;
    }
    return std::make_shared<const chain::Block>(std::move(b));
  }

  BlockPtr rogue_block(std::uint32_t q, const Node& proposer, std::uint64_t h) {
    Node& rogue = nodes_[q];
    const auto& enclave = world_.enclaves[q];
    const auto& ctx = ctx_for(proposer.chain.head_hash(), h);
    const auto& state = *proposer.chain.state();
    auto block = chain::build_block(proposer.chain.head(), state, make_batch(state, h),
                                    static_cast<std::uint64_t>(now_ / 1000), enclave,
                                    world_.registry);
    auto sealed = chain::seal_block(std::move(block), enclave, world_.authority(enclave.vendor_id),
                                    ctx.expected_nonce, alg_);
    rogue.ops.hash += 4;
    rogue.ops.quote_issue += 1;
    rogue.ops.sign += 1;
    return std::make_shared<const chain::Block>(std::move(sealed));
  }

  void adopt_candidate(Node& n, HeightView& hv, const BlockPtr& block, const StatePtr& post,
                       bool forged, std::uint64_t record, std::uint32_t proposer,
                       const validation::RoundContext& ctx) {
    hv.candidate = block;
    hv.post_state = post;
    hv.forged = forged;
    hv.record = record;
    hv.proposer = proposer;
    hv.tracker.emplace(info(block).commitment, ctx, k_eff_);
    auto quote = codec::decode<attestation::AttestationQuote>(block->header.attestation_quote);
    hv.tracker->record_attestation({quote.vendor_id, quote, proposer}, world_.registry, &qcache_);
    hv.voters.insert(proposer);
    auto early = std::move(hv.early);
    hv.early.clear();
    for (const auto& att : early) try_record(n, hv, att);
  }

  void try_record(Node&, HeightView& hv, const validation::ReAttestation& att) {
    try {
      hv.tracker->record_attestation(att, world_.registry, &qcache_);
      hv.voters.insert(att.validator);
    } catch (const CommitmentMismatch&) {
      ++foreign_attestations_;
    } catch (const InvalidQuote&) {
      ++invalid_attestations_;
    }
  }

  // ---- message handling ----

  void handle(Deliver& e) {
    if (partitioned(e.from, e.to)) {
      ++partitioned_;
      return;
    }
    Node& n = nodes_[e.to];
    std::visit(
        [&](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Proposal>) {
            on_proposal(n, std::move(m));
          } else if constexpr (std::is_same_v<T, ReAttMsg>) {
            ++n.ops.quote_verify;
            cpu(n, qv_cost(), AttestationChecked{n.id, std::move(m), false});
          } else if constexpr (std::is_same_v<T, SyncRequest>) {
            on_sync_request(n, e.from, m);
          } else {
            const auto quotes = m.cert.quotes.size();
            cpu(n, qv_cost() * static_cast<Clock>(1 + quotes), SyncChecked{n.id, std::move(m)});
          }
        },
        e.msg);
  }

  void on_proposal(Node& n, Proposal p) {
    if (p.received_at < 0) p.received_at = now_;
    const std::uint64_t hb = p.block->header.height;
    const std::uint64_t head = n.chain.height();
    if (hb == 0) return;
    if (hb <= head) {
      if (info(p.block).hash == n.chain.at(hb).hash) return;
      const auto ctx = ctx_for(n.chain.at(hb - 1).hash, hb);
      auto verdict = verdict_for(n, p.block, ctx);
      const Clock cost = stage_reached(verdict) >= Stage::attestation ? qv_cost() : 0;
      cpu(n, cost, ProposalChecked{n.id, p, verdict, p.received_at, true});
      return;
    }
    HeightView& hv = n.heights[hb];
    if (hb > head + 1) {
      hv.deferred.push_back(std::move(p));
      return;
    }
    if (!hv.seen.insert(p.block.get()).second) {
      // A re-proposal: repeat our re-attestation in case it was lost.
      if (hv.own_att && p.record > hv.resent_for_record) {
        hv.resent_for_record = p.record;
        broadcast(n.id, ReAttMsg{hb, *hv.own_att});
      }
      return;
    }
    const auto& ctx = ctx_for(n.chain.head_hash(), hb);
    auto verdict = verdict_for(n, p.block, ctx);
    const Clock cost = stage_reached(verdict) >= Stage::attestation ? qv_cost() : 0;
    cpu(n, cost, ProposalChecked{n.id, p, verdict, p.received_at, false});
  }

  void handle(ProposalChecked& e) {
    Node& n = nodes_[e.node];
    if (!e.verdict.accepted) {
      records_[e.p.record].rejections.push_back({n.id, e.verdict.reason, e.p.adversarial});
      return;
    }
    const std::uint64_t hb = e.p.block->header.height;
    if (e.past || hb != n.chain.height() + 1) return;
    HeightView& hv = n.heights[hb];
    if (hv.candidate) return;
    const auto ctx = ctx_for(n.chain.head_hash(), hb);
    adopt_candidate(n, hv, e.p.block, e.p.post_state, e.p.forged, e.p.record, e.p.sender, ctx);
    hv.observed = e.delivered;
    records_[e.p.record].observed_us[n.id] = e.delivered;

    if (n.colluder && hv.forged) {
      // Colluders attest the false transition without running the program.
      const auto& enclave = world_.enclaves[n.id];
      const auto& authority = world_.authority(enclave.vendor_id);
      attestation::QuoteUserData ud{enclave.block_keypair.public_key, info(hv.candidate).commitment,
                                    ctx.expected_height, ctx.chain_id, ctx.expected_nonce};
      auto quote = attestation::issue_quote(authority, authority.canonical_measurement, ud);
      n.ops.quote_issue += 1;
      request_quote(enclave.vendor_id, OwnQuoteReady{n.id, hb, {enclave.vendor_id, quote, n.id}});
    } else {
      cpu(n, exec_cost(hv.candidate->body.transactions.size()), Reexecuted{n.id, hb});
    }
    check_finalize(n, hb);
  }

  void handle(Reexecuted& e) {
    Node& n = nodes_[e.node];
    if (e.height != n.chain.height() + 1) return;
    HeightView& hv = n.heights[e.height];
    if (!hv.candidate) return;
    const auto& ctx = ctx_for(n.chain.head_hash(), e.height);
    const auto& enclave = world_.enclaves[n.id];
    n.ops.hash += 3;
    try {
      auto att = validation::produce_reattestation(*hv.candidate, enclave, n.id,
                                                   world_.authority(enclave.vendor_id), ctx,
                                                   *n.chain.state(), alg_);
      n.ops.quote_issue += 1;
      request_quote(enclave.vendor_id, OwnQuoteReady{n.id, e.height, std::move(att)});
    } catch (const StateTransitionMismatch&) {
      ++records_[hv.record].reexecution_refusals;
    }
  }

  void handle(OwnQuoteReady& e) {
    Node& n = nodes_[e.node];
    if (e.height > n.chain.height()) {
      n.heights[e.height].own_att = e.att;
    }
    ReAttMsg m{e.height, std::move(e.att)};
    broadcast(n.id, m);
    ++n.ops.quote_verify;
    cpu(n, qv_cost(), AttestationChecked{n.id, std::move(m), true});
  }

  void handle(AttestationChecked& e) {
    Node& n = nodes_[e.node];
    if (e.m.height <= n.chain.height()) return;
    HeightView& hv = n.heights[e.m.height];
    if (e.own) hv.own_attested = true;
    if (!hv.candidate) {
      hv.early.push_back(std::move(e.m.att));
      return;
    }
    try_record(n, hv, e.m.att);
    check_finalize(n, e.m.height);
  }

  void check_finalize(Node& n, std::uint64_t h) {
    if (h != n.chain.height() + 1) return;
    auto it = n.heights.find(h);
    if (it == n.heights.end()) return;
    HeightView& hv = it->second;
    if (!hv.candidate || !hv.tracker || !hv.own_attested) return;
    const bool threshold = s_.protocol == Protocol::pote ? hv.tracker->finalized()
                                                         : hv.voters.size() >= votes_needed_;
    if (!threshold) return;
    if (hv.forged) {
      if (!hv.shadow_finalized) {
        hv.shadow_finalized = true;
        records_[hv.record].forged_finalized_by.push_back(n.id);
      }
      return;
    }
    do_finalize(n, h, hv.candidate, hv.post_state, *hv.tracker, hv.observed, false);
  }

  void do_finalize(Node& n, std::uint64_t h, const BlockPtr& block, const StatePtr& post,
                   const validation::FinalityTracker& tracker, Clock observed, bool via_sync) {
    const auto& parent_state = n.chain.state();
    const Digest32 parent_root = n.chain.head().header.state_root;
    const auto& replay = replay_for(block, parent_state, parent_root);
    const auto& bi = info(block);
    validation::FinalizeHints hints;
    hints.replay = &replay.result;
    hints.replay_commitment = replay.commitment;
    hints.commitment = bi.commitment;
    hints.block_hash = bi.hash;
    if (post) hints.adopted_commitment = state_commitment_of(post);
    auto outcome = validation::finalize(tracker, n.chain, block, s_.finalize_mode, post, hints);
    n.ops.hash += post ? 3 : 2;
    if (!post_state_by_hash_.contains(bi.hash)) post_state_by_hash_[bi.hash] = n.chain.state();

    auto& rec = records_[latest_record_.at(h)];
    rec.finalized_us[n.id] = now_;
    rec.observed_us[n.id] = observed == kNever ? now_ : observed;
    rec.via_sync[n.id] = via_sync;
    if (!outcome.paths_agree) rec.paths_agree = false;

    auto deferred_next = std::move(n.heights[h + 1].deferred);
    for (auto it = n.heights.begin(); it != n.heights.end();) {
      it = it->first <= h ? n.heights.erase(it) : std::next(it);
    }
    n.heights[h + 1].deferred = std::move(deferred_next);
    enter_height(n, h + 1);
  }

  // ---- timeouts and catch-up ----

  void handle(Timer& e) {
    Node& n = nodes_[e.node];
    if (n.chain.height() >= e.height) return;
    const bool live = budget_left();
    if (!live) {
      if (n.last_timer_used) return;
      n.last_timer_used = true;
    }
    const auto& ctx = ctx_for(n.chain.head_hash(), e.height);
    const bool is_proposer =
        ctx.expected_proposer.pk_block == world_.enclaves[n.id].block_keypair.public_key;
    if (is_proposer && sealed_.contains(e.height)) {
      records_[latest_record_.at(e.height)].stalled = true;
      if (live) {
        const auto rec = new_record(n.id, e.height);
        propose(n, rec);
      }
    }
    broadcast(n.id, SyncRequest{e.height});
    if (live && now_ + to_us(s_.round_timeout_ms) <= horizon_) {
      schedule(now_ + to_us(s_.round_timeout_ms), Timer{n.id, e.height});
    }
  }

  void on_sync_request(Node& n, std::uint32_t from, const SyncRequest& m) {
    if (n.chain.height() < m.height) return;
    const auto& entry = n.chain.at(m.height);
    auto it = post_state_by_hash_.find(entry.hash);
    StatePtr post = it == post_state_by_hash_.end() ? nullptr : it->second;
    send(n.id, from, SyncResponse{m.height, entry.block, entry.certificate, post});
  }

  void handle(SyncChecked& e) {
    Node& n = nodes_[e.node];
    const std::uint64_t h = e.r.height;
    if (h != n.chain.height() + 1 || !e.r.post_state) return;
    const auto& ctx = ctx_for(n.chain.head_hash(), h);
    n.ops.quote_verify += e.r.cert.quotes.size();
    if (!verdict_for(n, e.r.block, ctx).accepted) return;
    if (!validation::verify_certificate(e.r.cert, *e.r.block, world_.registry, ctx).ok) return;
    const auto& replay = replay_for(e.r.block, n.chain.state(), n.chain.head().header.state_root);
    n.ops.hash += 2;
    if (replay.commitment != e.r.block->header.state_root) return;

    validation::FinalityTracker tracker(e.r.cert.commitment, ctx, k_eff_);
    for (const auto& q : e.r.cert.quotes) {
      const auto owner = world_.node_of(q.user_data.pk_block);
      tracker.record_attestation({q.vendor_id, q, owner.value_or(0)}, world_.registry, &qcache_);
    }
    if (!tracker.finalized()) return;
    HeightView& hv = n.heights[h];
    const Clock observed = hv.observed == kNever ? now_ : hv.observed;
    do_finalize(n, h, e.r.block, e.r.post_state, tracker, observed, true);
  }

  // ---- results ----

  SimResult finish() {
    // Heights whose last attempt never reached every honest node stalled.
    for (auto& [h, idx] : latest_record_) {
      auto& rec = records_[idx];
      for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (!nodes_[i].colluder && nodes_[i].chain.height() < h) rec.stalled = true;
      }
    }
    SimResult out;
    out.scenario = s_;
    out.seed = seed_;
    out.records = std::move(records_);
    for (auto& n : nodes_) {
      out.honest.push_back(!n.colluder);
      out.ops.push_back(n.ops);
      out.chains.push_back(std::move(n.chain));
    }
    out.dropped_messages = dropped_;
    out.partitioned_messages = partitioned_;
    out.events_processed = events_;
    out.end_time_us = now_;
    return out;
  }

  Scenario s_;
  std::uint64_t seed_;
  World world_;
  HashAlgorithm alg_;
  SplitMix64 net_rng_;
  SplitMix64 workload_rng_;
  std::vector<VendorService> services_;
  std::uint32_t endpoints_ = 0;
  std::vector<Clock> link_last_;
  std::uint64_t next_job_ = 0;
  std::vector<Node> nodes_;
  std::vector<chain::AccountId> accounts_;
  StatePtr genesis_state_;
  Clock horizon_ = 0;
  std::size_t votes_needed_ = 0;
  std::uint32_t k_eff_ = 0;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  Clock now_ = 0;
  std::uint64_t events_ = 0;

  std::vector<RoundRecord> records_;
  std::map<std::uint64_t, std::size_t> latest_record_;
  std::map<std::uint64_t, std::uint32_t> attempts_;
  std::uint64_t rounds_started_ = 0;
  std::map<std::uint64_t, ProposerJob> jobs_;
  std::map<std::uint64_t, Sealed> sealed_;

  attestation::QuoteVerifyCache qcache_;
  std::map<std::pair<Digest32, std::uint64_t>, validation::RoundContext> ctx_cache_;
  std::unordered_map<const chain::Block*, BlockInfo> block_info_;
  std::vector<BlockPtr> keepalive_;
  std::map<std::tuple<const chain::Block*, Digest32, std::uint64_t>, validation::ValidationVerdict>
      verdicts_;
  std::map<std::pair<const chain::Block*, Digest32>, Replay> replays_;
  std::unordered_map<const chain::ChainState*, Digest32> state_commitments_;
  std::vector<StatePtr> state_keepalive_;
  std::map<Digest32, StatePtr> post_state_by_hash_;
  std::unordered_map<const chain::Block*, StatePtr> post_state_by_block_;

  std::uint64_t dropped_ = 0;
  std::uint64_t partitioned_ = 0;
  std::uint64_t foreign_attestations_ = 0;
  std::uint64_t invalid_attestations_ = 0;
};

}  // namespace

SimResult run_scenario(const Scenario& scenario, std::uint64_t seed) {
  Simulator sim(scenario, seed);
  return sim.run();
}

}  // namespace pote::sim
