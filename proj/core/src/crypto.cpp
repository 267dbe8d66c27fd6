/**
 * Copyright PoTE simulator contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pote/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace pote::crypto {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw Error("libsodium initialisation failed");
}

}  // namespace

PublicKey PublicKey::from_span(ByteView b) {
  if (b.size() != kPublicKeySize) {
    throw MalformedEncoding("public key must be 32 bytes, got " + std::to_string(b.size()));
  }
  PublicKey pk;
  std::copy(b.begin(), b.end(), pk.bytes.begin());
  return pk;
}

Signature Signature::from_span(ByteView b) {
  if (b.size() != kSignatureSize) {
    throw MalformedEncoding("signature must be 64 bytes, got " + std::to_string(b.size()));
  }
  Signature s;
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

KeyPair keygen(const Seed& seed) {
  ensure_sodium();
  std::array<std::uint8_t, kSecretKeySize> sk{};
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), sk.data(), seed.data());
  kp.secret_key = SecretKey(sk);
  sodium_memzero(sk.data(), sk.size());
  return kp;
}

Signature sign(const SecretKey& secret, ByteView message) {
  if (message.empty()) {
    throw std::invalid_argument("refusing to sign an empty message");
  }
  ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       secret.view().data());
  return sig;
}

bool verify(const PublicKey& public_key, ByteView message, ByteView signature) {
  if (signature.size() != kSignatureSize) return false;
  ensure_sodium();
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                     public_key.bytes.data()) == 0;
}

bool verify(const PublicKey& public_key, ByteView message, const Signature& signature) {
  return verify(public_key, message, signature.view());
}

Seed derive_key_seed(std::string_view domain, ByteView material) {
  Bytes preimage(domain.begin(), domain.end());
  preimage.insert(preimage.end(), material.begin(), material.end());
  return hash(preimage, HashAlgorithm::sha256).bytes();
}

}  // namespace pote::crypto
