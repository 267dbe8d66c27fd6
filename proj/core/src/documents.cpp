/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/documents.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace pote::docs {

using json = nlohmann::ordered_json;

namespace {

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string(what) + ": " + e.what());
  }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigInvalid(path + key + " is required");
  return obj.at(key);
}

void reject_unknown(const json& obj, std::set<std::string> known, const std::string& path) {
  for (const auto& [k, _] : obj.items()) {
    if (!known.contains(k)) throw ConfigInvalid(path + k + " is not a known field");
  }
}

std::uint64_t as_u64(const json& v, const std::string& name) {
  if (!v.is_number_unsigned()) throw ConfigInvalid(name + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Bytes as_hex(const json& v, const std::string& name, std::size_t size) {
  if (!v.is_string()) throw ConfigInvalid(name + " must be a hex string");
  auto bytes = from_hex(v.get<std::string>());
  if (!bytes || bytes->size() != size) {
    throw ConfigInvalid(name + " must be " + std::to_string(size) + " hex-encoded bytes");
  }
  return *bytes;
}

Digest32 as_digest(const json& v, const std::string& name) {
  auto b = as_hex(v, name, 32);
  Digest32 d;
  std::copy(b.begin(), b.end(), d.mutable_bytes().begin());
  return d;
}

}  // namespace

std::string registry_to_json(const attestation::VendorRegistry& registry) {
  json vendors = json::array();
  for (const auto& v : registry.vendors()) {
    vendors.push_back({{"id", v.id.value},
                       {"public_key", v.public_key.to_hex()},
                       {"status", std::string(attestation::to_string(v.status))}});
  }
  json j = {{"chain_id", registry.chain_id()},
            {"hash_algorithm", std::string(hash_algorithm_name(registry.hash_algorithm()))},
            {"canonical_measurement", registry.canonical_measurement().to_hex()},
            {"k", registry.diversity_threshold()},
            {"vendors", vendors}};
  return j.dump(2);
}

attestation::VendorRegistry registry_from_json(std::string_view text) {
  const json j = parse(text, "registry");
  reject_unknown(j, {"chain_id", "hash_algorithm", "canonical_measurement", "k", "vendors"}, "");
  const auto chain_id = as_u64(field(j, "chain_id", ""), "chain_id");
  const auto& alg_v = field(j, "hash_algorithm", "");
  auto alg = alg_v.is_string() ? hash_algorithm_from_name(alg_v.get<std::string>()) : std::nullopt;
  if (!alg) throw ConfigInvalid("hash_algorithm must be sha256 or blake2b-256");
  const auto measurement = as_digest(field(j, "canonical_measurement", ""), "canonical_measurement");
  const auto k = as_u64(field(j, "k", ""), "k");
  if (k > UINT32_MAX) throw ConfigInvalid("k is out of range");
  attestation::VendorRegistry registry(chain_id, measurement, static_cast<std::uint32_t>(k), *alg);

  const auto& vendors = field(j, "vendors", "");
  if (!vendors.is_array()) throw ConfigInvalid("vendors must be an array");
  std::size_t i = 0;
  for (const auto& v : vendors) {
    const std::string path = "vendors[" + std::to_string(i) + "].";
    reject_unknown(v, {"id", "public_key", "status"}, path);
    const auto id = as_u64(field(v, "id", path), path + "id");
    if (id != i + 1) throw ConfigInvalid(path + "id must be " + std::to_string(i + 1));
    const auto pk = crypto::PublicKey::from_span(
        as_hex(field(v, "public_key", path), path + "public_key", crypto::kPublicKeySize));
    const auto& st = field(v, "status", path);
    auto status = st.is_string() ? attestation::vendor_status_from_string(st.get<std::string>())
                                 : std::nullopt;
    if (!status) throw ConfigInvalid(path + "status must be active, revoked or compromised");
    const auto vid = registry.register_vendor(pk);
    if (*status != attestation::VendorStatus::active) registry.set_vendor_status(vid, *status);
    ++i;
  }
  return registry;
}

std::string context_to_json(const validation::RoundContext& ctx) {
  json j = {{"expected_height", ctx.expected_height},
            {"chain_id", ctx.chain_id},
            {"expected_nonce", ctx.expected_nonce.to_hex()},
            {"expected_parent_hash", ctx.expected_parent_hash.to_hex()},
            {"expected_proposer",
             {{"vendor_id", ctx.expected_proposer.vendor_id.value},
              {"enclave_index", ctx.expected_proposer.enclave_index},
              {"pk_block", ctx.expected_proposer.pk_block.to_hex()}}}};
  return j.dump(2);
}

validation::RoundContext context_from_json(std::string_view text) {
  const json j = parse(text, "context");
  reject_unknown(j,
                 {"expected_height", "chain_id", "expected_nonce", "expected_parent_hash",
                  "expected_proposer"},
                 "");
  validation::RoundContext ctx;
  ctx.expected_height = as_u64(field(j, "expected_height", ""), "expected_height");
  ctx.chain_id = as_u64(field(j, "chain_id", ""), "chain_id");
  ctx.expected_nonce = as_digest(field(j, "expected_nonce", ""), "expected_nonce");
  ctx.expected_parent_hash = as_digest(field(j, "expected_parent_hash", ""), "expected_parent_hash");
  const auto& p = field(j, "expected_proposer", "");
  const std::string path = "expected_proposer.";
  reject_unknown(p, {"vendor_id", "enclave_index", "pk_block"}, path);
  const auto vid = as_u64(field(p, "vendor_id", path), path + "vendor_id");
  if (vid == 0 || vid > 255) throw ConfigInvalid(path + "vendor_id must be in 1..255");
  const auto idx = as_u64(field(p, "enclave_index", path), path + "enclave_index");
  if (idx > UINT32_MAX) throw ConfigInvalid(path + "enclave_index is out of range");
  ctx.expected_proposer.vendor_id = attestation::VendorId{static_cast<std::uint8_t>(vid)};
  ctx.expected_proposer.enclave_index = static_cast<std::uint32_t>(idx);
  ctx.expected_proposer.pk_block = crypto::PublicKey::from_span(
      as_hex(field(p, "pk_block", path), path + "pk_block", crypto::kPublicKeySize));
  return ctx;
}

Bytes read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_binary(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigInvalid("cannot write " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw ConfigInvalid("cannot write " + path.string());
}

}  // namespace pote::docs
