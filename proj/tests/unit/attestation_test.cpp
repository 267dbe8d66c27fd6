#include <gtest/gtest.h>

#include "pote/attestation.hpp"
#include "pote/chain.hpp"
#include "support.hpp"

namespace pote::attestation {
namespace {

crypto::KeyPair key(std::uint8_t b) {
  crypto::Seed s{};
  s[0] = b;
  return crypto::keygen(s);
}

struct Fixture {
  Digest32 measurement = chain::measure_program(chain::canonical_program());
  VendorRegistry registry{1, measurement, 2};
  std::vector<VendorAuthority> authorities;

  Fixture() {
    for (std::uint8_t i = 1; i <= 3; ++i) {
      auto kp = key(i);
      auto id = registry.register_vendor(kp.public_key);
      authorities.push_back({id, kp, measurement, false});
    }
  }

  static QuoteUserData user_data() {
    QuoteUserData ud;
    ud.commitment.mutable_bytes()[0] = 9;
    ud.height = 4;
    ud.chain_id = 1;
    return ud;
  }
};

TEST(Registry, AssignsSequentialIds) {
  Fixture f;
  ASSERT_EQ(f.registry.vendors().size(), 3u);
  EXPECT_EQ(f.registry.vendors()[0].id.value, 1);
  EXPECT_EQ(f.registry.vendors()[2].id.value, 3);
  EXPECT_NE(f.registry.find(VendorId{2}), nullptr);
  EXPECT_EQ(f.registry.find(VendorId{4}), nullptr);
}

TEST(Registry, FullAfter255) {
  VendorRegistry r(1, Fixture().measurement, 1);
  for (int i = 0; i < 255; ++i) r.register_vendor(key(1).public_key);
  EXPECT_THROW(r.register_vendor(key(1).public_key), RegistryFull);
}

TEST(Registry, StatusChangesAreRecorded) {
  Fixture f;
  const auto epoch = f.registry.epoch();
  f.registry.set_vendor_status(VendorId{2}, VendorStatus::revoked);
  EXPECT_GT(f.registry.epoch(), epoch);
  ASSERT_FALSE(f.registry.history().empty());
  EXPECT_EQ(f.registry.history().back().to, VendorStatus::revoked);
  EXPECT_EQ(f.registry.active_count(), 2u);
  f.registry.set_vendor_status(VendorId{3}, VendorStatus::compromised);
  EXPECT_EQ(f.registry.active_count(), 2u);
  EXPECT_THROW(f.registry.set_vendor_status(VendorId{9}, VendorStatus::active), UnknownVendor);
}

TEST(Registry, ValidateChecksThreshold) {
  Fixture f;
  EXPECT_NO_THROW(f.registry.validate());
  VendorRegistry too_high(1, f.measurement, 4);
  too_high.register_vendor(key(1).public_key);
  EXPECT_THROW(too_high.validate(), ConfigInvalid);
  VendorRegistry zero_k(1, f.measurement, 0);
  zero_k.register_vendor(key(1).public_key);
  EXPECT_THROW(zero_k.validate(), ConfigInvalid);
  VendorRegistry no_measurement(1, Digest32{}, 1);
  no_measurement.register_vendor(key(1).public_key);
  EXPECT_THROW(no_measurement.validate(), ConfigInvalid);
}

TEST(Quote, IssueAndVerify) {
  Fixture f;
  auto q = issue_quote(f.authorities[0], f.measurement, Fixture::user_data());
  EXPECT_EQ(verify_quote(f.registry, q), VerifyOutcome::ok);
  auto bytes = codec::encode(q);
  EXPECT_EQ(bytes.size(), kQuoteEncodedSize);
  EXPECT_EQ(codec::decode<AttestationQuote>(bytes), q);
}

TEST(Quote, HonestVendorRefusesForeignMeasurement) {
  Fixture f;
  Digest32 other;
  other.mutable_bytes()[5] = 1;
  EXPECT_THROW(issue_quote(f.authorities[0], other, Fixture::user_data()), MeasurementRejected);
}

TEST(Quote, CompromisedVendorSignsAnything) {
  Fixture f;
  f.authorities[1].compromised = true;
  Digest32 other;
  other.mutable_bytes()[5] = 1;
  auto q = issue_quote(f.authorities[1], other, Fixture::user_data());
  EXPECT_EQ(verify_quote(f.registry, q), VerifyOutcome::wrong_measurement);
}

TEST(Quote, VerifyOutcomes) {
  Fixture f;
  auto q = issue_quote(f.authorities[0], f.measurement, Fixture::user_data());

  auto unknown = q;
  unknown.vendor_id = VendorId{7};
  EXPECT_EQ(verify_quote(f.registry, unknown), VerifyOutcome::unknown_vendor);

  auto forged = q;
  forged.user_data.height += 1;
  EXPECT_EQ(verify_quote(f.registry, forged), VerifyOutcome::bad_signature);

  auto swapped = q;
  swapped.vendor_id = VendorId{2};
  EXPECT_EQ(verify_quote(f.registry, swapped), VerifyOutcome::bad_signature);

  f.registry.set_vendor_status(VendorId{1}, VendorStatus::revoked);
  EXPECT_EQ(verify_quote(f.registry, q), VerifyOutcome::revoked_vendor);
}

TEST(Quote, EveryByteFlipBreaksVerification) {
  Fixture f;
  auto q = issue_quote(f.authorities[0], f.measurement, Fixture::user_data());
  const auto bytes = codec::encode(q);
  // Length prefix excluded: changing it makes the encoding malformed instead.
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto b = bytes;
    b[i] ^= 0x01;
    bool rejected = false;
    try {
      rejected = verify_quote(f.registry, codec::decode<AttestationQuote>(b)) != VerifyOutcome::ok;
    } catch (const MalformedEncoding&) {
      rejected = true;
    }
    EXPECT_TRUE(rejected) << "byte " << i;
  }
}

TEST(Quote, CacheTracksRegistryEpoch) {
  Fixture f;
  auto q = issue_quote(f.authorities[0], f.measurement, Fixture::user_data());
  QuoteVerifyCache cache;
  EXPECT_EQ(cache.verify(f.registry, q), VerifyOutcome::ok);
  EXPECT_EQ(cache.verify(f.registry, q), VerifyOutcome::ok);
  EXPECT_EQ(cache.hits(), 1u);
  f.registry.set_vendor_status(VendorId{1}, VendorStatus::revoked);
  EXPECT_EQ(cache.verify(f.registry, q), VerifyOutcome::revoked_vendor);
}

TEST(Quote, StatusStrings) {
  EXPECT_EQ(vendor_status_from_string("compromised"), VendorStatus::compromised);
  EXPECT_EQ(to_string(VendorStatus::revoked), "revoked");
  EXPECT_FALSE(vendor_status_from_string("gone").has_value());
}

}  // namespace
}  // namespace pote::attestation
