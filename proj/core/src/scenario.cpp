/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pote/prng.hpp"

namespace pote::sim {

using nlohmann::json;

namespace {

// Strict view over a JSON object: every read is recorded so unknown keys can
// be reported, and type errors name the full field path.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigInvalid(where("") + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) throw ConfigInvalid("missing required field " + where(key));
    used_.insert(key);
    return j_.at(key);
  }

  std::uint64_t u64(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigInvalid(where(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint32_t u32(const std::string& key) {
    auto v = u64(key);
    if (v > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigInvalid(where(key) + " exceeds 32 bits");
    }
    return static_cast<std::uint32_t>(v);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigInvalid(where(key) + " must be a number");
    return v.get<double>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigInvalid(where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigInvalid(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<std::uint32_t> u32_list(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigInvalid(where(key) + " must be an array");
    std::vector<std::uint32_t> out;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() > UINT32_MAX) {
        throw ConfigInvalid(where(key) + " must hold non-negative 32-bit integers");
      }
      out.push_back(e.get<std::uint32_t>());
    }
    return out;
  }

  Fields object(const std::string& key) { return Fields(raw(key), where(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigInvalid("unknown field " + where(it.key()));
    }
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "document" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

DelayModel parse_delay(Fields f) {
  DelayModel d;
  d.base_latency_ms = f.number("base_latency_ms");
  d.jitter_ms = f.number("jitter_ms");
  d.drop_probability = f.number("drop_probability");
  d.attestation_issue_ms = f.number("attestation_issue_ms");
  d.attestation_service_ms = f.number("attestation_service_ms");
  d.quote_verify_ms = f.number("quote_verify_ms");
  d.exec_ms_per_100tx = f.number("exec_ms_per_100tx");
  if (f.has("colocate_by_vendor")) d.colocate_by_vendor = f.boolean("colocate_by_vendor");
  if (f.has("local_latency_ms")) d.local_latency_ms = f.number("local_latency_ms");
  const json& parts = f.raw("partitions");
  if (!parts.is_array()) throw ConfigInvalid(f.where("partitions") + " must be an array");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Fields p(parts[i], f.where("partitions") + "[" + std::to_string(i) + "]");
    Partition part;
    part.from = p.u32_list("from");
    part.to = p.u32_list("to");
    part.start_ms = p.number("start_ms");
    part.end_ms = p.number("end_ms");
    p.finish();
    d.partitions.push_back(std::move(part));
  }
  f.finish();
  return d;
}

AdversarySpec parse_adversary(Fields f) {
  AdversarySpec a;
  auto mode = adversary_mode_from_string(f.string("mode"));
  if (!mode) throw ConfigInvalid(f.where("mode") + " is not a known adversary mode");
  a.mode = *mode;
  if (f.has("compromised_vendors")) {
    for (auto v : f.u32_list("compromised_vendors")) {
      if (v > 255) throw ConfigInvalid(f.where("compromised_vendors") + " holds ids above 255");
      a.compromised_vendors.push_back(static_cast<std::uint8_t>(v));
    }
  }
  if (f.has("from_round")) a.from_round = f.u64("from_round");
  if (f.has("to_round")) a.to_round = f.u64("to_round");
  f.finish();
  return a;
}

json delay_to_json(const DelayModel& d) {
  json parts = json::array();
  for (const auto& p : d.partitions) {
    parts.push_back({{"from", p.from}, {"to", p.to}, {"start_ms", p.start_ms}, {"end_ms", p.end_ms}});
  }
  return {{"base_latency_ms", d.base_latency_ms},
          {"jitter_ms", d.jitter_ms},
          {"drop_probability", d.drop_probability},
          {"partitions", parts},
          {"attestation_issue_ms", d.attestation_issue_ms},
          {"attestation_service_ms", d.attestation_service_ms},
          {"quote_verify_ms", d.quote_verify_ms},
          {"exec_ms_per_100tx", d.exec_ms_per_100tx},
          {"colocate_by_vendor", d.colocate_by_vendor},
          {"local_latency_ms", d.local_latency_ms}};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigInvalid(message);
}

bool non_negative(double v) { return std::isfinite(v) && v >= 0; }

Digest32 master_seed_of(std::uint64_t seed) {
  codec::Writer w;
  w.u64(seed);
  return Digest32(crypto::derive_key_seed("POTE_MASTER_SEED", w.bytes()));
}

}  // namespace

std::string_view to_string(AdversaryMode mode) {
  switch (mode) {
    case AdversaryMode::none: return "none";
    case AdversaryMode::tamper_after_attest: return "tamper_after_attest";
    case AdversaryMode::keep_quote_alter_block: return "keep_quote_alter_block";
    case AdversaryMode::replay_old_quote: return "replay_old_quote";
    case AdversaryMode::rogue_proposer: return "rogue_proposer";
  }
  return "unknown";
}

std::optional<AdversaryMode> adversary_mode_from_string(std::string_view s) {
  for (auto m : {AdversaryMode::none, AdversaryMode::tamper_after_attest,
                 AdversaryMode::keep_quote_alter_block, AdversaryMode::replay_old_quote,
                 AdversaryMode::rogue_proposer}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string("scenario is not valid JSON: ") + e.what());
  }
  Fields f(doc, "");
  Scenario s;
  s.name = f.string("name");
  {
    Fields n = f.object("network");
    s.network.validators = n.u32("validators");
    s.network.vendors = n.u32("vendors");
    s.network.enclaves_per_vendor = n.u32_list("enclaves_per_vendor");
    s.network.k = n.u32("k");
    n.finish();
  }
  {
    Fields l = f.object("ledger");
    s.ledger.chain_id = l.u64("chain_id");
    const auto alg = l.string("hash_algorithm");
    if (alg == "sha256") {
      s.ledger.hash_algorithm = HashAlgorithm::sha256;
    } else if (alg == "blake2b-256") {
      s.ledger.hash_algorithm = HashAlgorithm::blake2b_256;
    } else {
      throw ConfigInvalid("ledger.hash_algorithm must be sha256 or blake2b-256");
    }
    s.ledger.accounts = l.u32("accounts");
    s.ledger.initial_balance = l.u64("initial_balance");
    l.finish();
  }
  s.rounds = f.u64("rounds");
  s.tx_per_block = f.u32("tx_per_block");
  s.delay = parse_delay(f.object("delay"));
  if (f.has("adversary")) s.adversary = parse_adversary(f.object("adversary"));
  s.seed = f.u64("seed");
  s.prng = f.string("prng");
  s.round_timeout_ms = f.number("round_timeout_ms");
  auto mode = validation::finalize_mode_from_string(f.string("finalize_mode"));
  if (!mode) throw ConfigInvalid("finalize_mode must be replay or adopt");
  s.finalize_mode = *mode;
  const auto proto = f.string("protocol");
  if (proto == "pote") {
    s.protocol = Protocol::pote;
  } else if (proto == "slotted") {
    s.protocol = Protocol::slotted;
  } else {
    throw ConfigInvalid("protocol must be pote or slotted");
  }
  if (s.protocol == Protocol::slotted || f.has("slotted")) {
    Fields sl = f.object("slotted");
    s.slotted.slot_interval_ms = sl.number("slot_interval_ms");
    s.slotted.vote_fraction = sl.number("vote_fraction");
    sl.finish();
  }
  f.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json adv = {{"mode", std::string(to_string(s.adversary.mode))},
              {"compromised_vendors", s.adversary.compromised_vendors},
              {"from_round", s.adversary.from_round},
              {"to_round", s.adversary.to_round}};
  json doc = {
      {"name", s.name},
      {"network",
       {{"validators", s.network.validators},
        {"vendors", s.network.vendors},
        {"enclaves_per_vendor", s.network.enclaves_per_vendor},
        {"k", s.network.k}}},
      {"ledger",
       {{"chain_id", s.ledger.chain_id},
        {"hash_algorithm", std::string(hash_algorithm_name(s.ledger.hash_algorithm))},
        {"accounts", s.ledger.accounts},
        {"initial_balance", s.ledger.initial_balance}}},
      {"rounds", s.rounds},
      {"tx_per_block", s.tx_per_block},
      {"delay", delay_to_json(s.delay)},
      {"adversary", adv},
      {"seed", s.seed},
      {"prng", s.prng},
      {"round_timeout_ms", s.round_timeout_ms},
      {"finalize_mode", std::string(validation::to_string(s.finalize_mode))},
      {"protocol", s.protocol == Protocol::pote ? "pote" : "slotted"},
      {"slotted",
       {{"slot_interval_ms", s.slotted.slot_interval_ms},
        {"vote_fraction", s.slotted.vote_fraction}}},
  };
  return doc.dump(2);
}

void validate_scenario(const Scenario& s) {
  const auto& n = s.network;
  require(n.validators >= 1, "network.validators must be at least 1");
  require(n.vendors >= 1 && n.vendors <= attestation::VendorRegistry::kMaxVendors,
          "network.vendors must be in [1, 255]");
  require(n.enclaves_per_vendor.size() == n.vendors,
          "network.enclaves_per_vendor must list one count per vendor");
  for (std::size_t i = 0; i < n.enclaves_per_vendor.size(); ++i) {
    require(n.enclaves_per_vendor[i] >= 1,
            "network.enclaves_per_vendor[" + std::to_string(i) + "] must be at least 1");
  }
  const std::uint64_t total = std::accumulate(n.enclaves_per_vendor.begin(),
                                              n.enclaves_per_vendor.end(), std::uint64_t{0});
  require(total == n.validators, "network.enclaves_per_vendor must sum to network.validators (" +
                                     std::to_string(total) + " != " +
                                     std::to_string(n.validators) + ")");
  require(n.k >= 1, "network.k must be at least 1");
  require(n.k <= n.vendors, "network.k=" + std::to_string(n.k) + " exceeds active vendors (" +
                                std::to_string(n.vendors) + ")");

  require(s.rounds >= 1, "rounds must be at least 1");
  if (s.tx_per_block > 0) require(s.ledger.accounts >= 2, "ledger.accounts must be at least 2");
  require(s.ledger.initial_balance == 0 ||
              s.ledger.accounts <= UINT64_MAX / s.ledger.initial_balance,
          "ledger total balance overflows 64 bits");

  const auto& d = s.delay;
  require(non_negative(d.base_latency_ms), "delay.base_latency_ms must be non-negative");
  require(non_negative(d.jitter_ms), "delay.jitter_ms must be non-negative");
  require(std::isfinite(d.drop_probability) && d.drop_probability >= 0 && d.drop_probability <= 1,
          "delay.drop_probability must be in [0, 1]");
  require(non_negative(d.attestation_issue_ms), "delay.attestation_issue_ms must be non-negative");
  require(non_negative(d.attestation_service_ms),
          "delay.attestation_service_ms must be non-negative");
  require(non_negative(d.quote_verify_ms), "delay.quote_verify_ms must be non-negative");
  require(non_negative(d.exec_ms_per_100tx), "delay.exec_ms_per_100tx must be non-negative");
  require(non_negative(d.local_latency_ms), "delay.local_latency_ms must be non-negative");
  for (std::size_t i = 0; i < d.partitions.size(); ++i) {
    const auto& p = d.partitions[i];
    const std::string at = "delay.partitions[" + std::to_string(i) + "]";
    require(non_negative(p.start_ms) && non_negative(p.end_ms) && p.start_ms <= p.end_ms,
            at + " needs 0 <= start_ms <= end_ms");
    for (auto id : p.from) require(id < n.validators, at + ".from names an unknown node");
    for (auto id : p.to) require(id < n.validators, at + ".to names an unknown node");
  }

  const auto& a = s.adversary;
  std::set<std::uint8_t> seen;
  for (auto v : a.compromised_vendors) {
    require(v >= 1 && v <= n.vendors, "adversary.compromised_vendors names an unknown vendor");
    require(seen.insert(v).second, "adversary.compromised_vendors lists a vendor twice");
  }
  require(a.from_round <= a.to_round, "adversary.from_round must not exceed adversary.to_round");
  if (a.mode == AdversaryMode::rogue_proposer) {
    require(n.validators >= 2, "rogue_proposer needs at least 2 validators");
  }

  require(s.prng == SplitMix64::kName, "prng must be splitmix64");
  require(std::isfinite(s.round_timeout_ms) && s.round_timeout_ms > 0,
          "round_timeout_ms must be positive");
  if (s.protocol == Protocol::slotted) {
    require(std::isfinite(s.slotted.slot_interval_ms) && s.slotted.slot_interval_ms > 0,
            "slotted.slot_interval_ms must be positive");
    require(s.slotted.vote_fraction > 0 && s.slotted.vote_fraction <= 1,
            "slotted.vote_fraction must be in (0, 1]");
  }
}

std::vector<std::uint32_t> round_robin_enclaves(std::uint32_t validators, std::uint32_t vendors) {
  std::vector<std::uint32_t> out(vendors, 0);
  for (std::uint32_t i = 0; i < validators; ++i) ++out[i % vendors];
  return out;
}

Scenario calibrated_latency_scenario(std::uint32_t validators, std::uint64_t rounds) {
  Scenario s;
  s.name = "calibrated-latency-" + std::to_string(validators);
  s.network = {validators, 3, round_robin_enclaves(validators, 3), 3};
  s.ledger = {1, HashAlgorithm::sha256, 256, 1'000'000'000};
  s.rounds = rounds;
  s.tx_per_block = 1000;
  s.delay.base_latency_ms = 10;
  s.delay.jitter_ms = 5;
  s.delay.drop_probability = 0;
  s.delay.attestation_issue_ms = 25;
  s.delay.attestation_service_ms = 1.0;
  s.delay.quote_verify_ms = 0.05;
  s.delay.exec_ms_per_100tx = 2;
  s.delay.colocate_by_vendor = true;
  s.seed = 1;
  s.round_timeout_ms = 2000;
  s.finalize_mode = validation::FinalizeMode::adopt;
  return s;
}

std::optional<std::uint32_t> World::node_of(const crypto::PublicKey& pk) const {
  for (std::uint32_t i = 0; i < enclaves.size(); ++i) {
    if (enclaves[i].block_keypair.public_key == pk) return i;
  }
  return std::nullopt;
}

World build_world(const Scenario& s, std::uint64_t seed) {
  validate_scenario(s);
  const HashAlgorithm alg = s.ledger.hash_algorithm;
  const Digest32 master = master_seed_of(seed);
  const auto program = chain::canonical_program();
  const Digest32 measurement = chain::measure_program(program, alg);

  attestation::VendorRegistry registry(s.ledger.chain_id, measurement, s.network.k, alg);
  std::vector<attestation::VendorAuthority> authorities;
  for (std::uint32_t v = 1; v <= s.network.vendors; ++v) {
    codec::Writer w;
    w.digest(master).u8(static_cast<std::uint8_t>(v));
    auto kp = crypto::keygen(crypto::derive_key_seed("POTE_VENDOR_KEY", w.bytes()));
    auto id = registry.register_vendor(kp.public_key);
    authorities.push_back({id, kp, measurement, false});
  }
  for (auto v : s.adversary.compromised_vendors) {
    registry.set_vendor_status(attestation::VendorId{v}, attestation::VendorStatus::compromised);
    authorities.at(v - 1).compromised = true;
  }
  registry.validate();

  // Nodes take vendors cyclically, skipping vendors whose enclave quota is
  // used up; with equal quotas this is plain round-robin.
  std::vector<attestation::EnclaveIdentity> enclaves;
  std::vector<std::uint32_t> used(s.network.vendors, 0);
  std::uint32_t cursor = 0;
  for (std::uint32_t node = 0; node < s.network.validators; ++node) {
    while (used[cursor] >= s.network.enclaves_per_vendor[cursor]) {
      cursor = (cursor + 1) % s.network.vendors;
    }
    const auto vendor = static_cast<std::uint8_t>(cursor + 1);
    const std::uint32_t index = used[cursor]++;
    codec::Writer w;
    w.digest(master).u8(vendor).u32(index);
    auto kp = crypto::keygen(crypto::derive_key_seed("POTE_ENCLAVE_KEY", w.bytes()));
    enclaves.push_back({attestation::VendorId{vendor}, index, kp});
    cursor = (cursor + 1) % s.network.vendors;
  }

  std::vector<selection::EnclaveRef> refs;
  for (const auto& e : enclaves) refs.push_back(selection::EnclaveRef::of(e));
  auto roster = selection::EnclaveRoster::build(registry, refs);

  chain::ChainState state;
  for (std::uint32_t i = 0; i < s.ledger.accounts; ++i) {
    state.set_account(chain::AccountId::from_index(i), {s.ledger.initial_balance, 0});
  }
  auto genesis = chain::genesis_block(s.ledger.chain_id, state, alg);

  return World{master,     program, std::move(registry), std::move(authorities),
               std::move(enclaves), std::move(roster), std::move(state), std::move(genesis)};
}

std::string genesis_to_json(const World& w) {
  json accounts = json::array();
  for (const auto& [id, acct] : w.genesis_state.accounts()) {
    accounts.push_back({{"id", id.to_hex()}, {"balance", acct.balance}});
  }
  json vendors = json::array();
  for (const auto& v : w.registry.vendors()) {
    vendors.push_back({{"id", v.id.value}, {"public_key", v.public_key.to_hex()}});
  }
  json enclaves = json::array();
  for (const auto& e : w.enclaves) {
    enclaves.push_back({{"vendor_id", e.vendor_id.value},
                        {"enclave_index", e.enclave_index},
                        {"pk_block", e.block_keypair.public_key.to_hex()}});
  }
  json doc = {{"chain_id", w.registry.chain_id()},
              {"hash_algorithm", std::string(hash_algorithm_name(w.registry.hash_algorithm()))},
              {"program",
               {{"name", w.program.name},
                {"version", w.program.version},
                {"rule_flags", w.program.rule_flags}}},
              {"canonical_measurement", w.registry.canonical_measurement().to_hex()},
              {"k", w.registry.diversity_threshold()},
              {"accounts", accounts},
              {"vendors", vendors},
              {"enclaves", enclaves},
              {"master_seed", w.master_seed.to_hex()}};
  return doc.dump(2);
}

}  // namespace pote::sim
