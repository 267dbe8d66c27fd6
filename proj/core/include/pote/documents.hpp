/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pote/attestation.hpp"
#include "pote/codec.hpp"
#include "pote/validation.hpp"

// JSON forms of the registry and round context, and file helpers, used by the
// command-line tools. Parse errors throw ConfigInvalid naming the field.
namespace pote::docs {

/// {chain_id, hash_algorithm, canonical_measurement, k,
///  vendors: [{id, public_key, status}]} with ids dense from 1.
std::string registry_to_json(const attestation::VendorRegistry& registry);
attestation::VendorRegistry registry_from_json(std::string_view text);

/// {expected_height, chain_id, expected_nonce, expected_parent_hash,
///  expected_proposer: {vendor_id, enclave_index, pk_block}}.
std::string context_to_json(const validation::RoundContext& ctx);
validation::RoundContext context_from_json(std::string_view text);

Bytes read_binary(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, ByteView bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace pote::docs
