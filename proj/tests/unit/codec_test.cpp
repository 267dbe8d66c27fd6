#include <gtest/gtest.h>

#include "pote/chain.hpp"
#include "pote/codec.hpp"
#include "support.hpp"

namespace pote {
namespace {

using test::golden;

TEST(Codec, IntegersAreLittleEndian) {
  codec::Writer w;
  w.u64(1).u32(0x01020304).u8(0xff);
  EXPECT_EQ(to_hex(w.bytes()), "0100000000000000" "04030201" "ff");
}

TEST(Codec, EmptyVarFieldIsZeroLength) {
  codec::Writer w;
  w.var({}, 10, "x");
  EXPECT_EQ(to_hex(w.bytes()), "00000000");
}

TEST(Codec, VarFieldOverLimitThrows) {
  Bytes big(11, 0);
  codec::Writer w;
  EXPECT_THROW(w.var(big, 10, "x"), VariableFieldTooLong);
}

TEST(Codec, OversizeQuoteInHeaderThrows) {
  chain::BlockHeader h;
  h.attestation_quote.resize(codec::kMaxQuoteBytes + 1);
  EXPECT_THROW(codec::encode(h), VariableFieldTooLong);
  h.attestation_quote.resize(codec::kMaxQuoteBytes);
  EXPECT_NO_THROW(codec::encode(h));
}

TEST(Codec, ReaderRejectsTruncationAndTrailingBytes) {
  Bytes b{1, 2, 3};
  codec::Reader r(b);
  EXPECT_THROW(r.u32(), MalformedEncoding);

  codec::Writer w;
  w.u64(7);
  Bytes extra = w.bytes();
  extra.push_back(0);
  codec::Reader r2(extra);
  EXPECT_EQ(r2.u64(), 7u);
  EXPECT_THROW(r2.finish(), MalformedEncoding);
}

TEST(Codec, LengthPrefixBeyondInputIsMalformed) {
  codec::Writer w;
  w.u32(50).u8(1);
  codec::Reader r(w.bytes());
  EXPECT_THROW(r.var(100, "x"), MalformedEncoding);
}

TEST(Codec, LengthPrefixBeyondLimitIsMalformed) {
  codec::Writer w;
  w.u32(5).raw(Bytes(5, 0));
  codec::Reader r(w.bytes());
  EXPECT_THROW(r.var(4, "x"), MalformedEncoding);
}

TEST(Codec, ZeroHeaderMatchesGolden) {
  chain::BlockHeader h;
  auto bytes = codec::encode(h);
  EXPECT_EQ(bytes.size(), 161u);
  EXPECT_EQ(to_hex(bytes), golden()["zero_header"].get<std::string>());
}

TEST(Codec, HexRoundTrip) {
  EXPECT_EQ(to_hex(from_hex("00ABff").value()), "00abff");
  EXPECT_FALSE(from_hex("abc").has_value());
  EXPECT_FALSE(from_hex("zz").has_value());
}

TEST(Codec, DigestFromSpanNeeds32Bytes) {
  Bytes b(31, 0);
  EXPECT_THROW(Digest32::from_span(b), MalformedEncoding);
  EXPECT_TRUE(Digest32().is_zero());
}

TEST(Codec, PrefixIsLittleEndian) {
  Digest32 d;
  d.mutable_bytes()[0] = 0x02;
  d.mutable_bytes()[1] = 0x01;
  EXPECT_EQ(d.prefix_u64_le(), 0x0102u);
}

TEST(Hash, Sha256AndBlake2bMatchGolden) {
  const std::string abc = "abc";
  ByteView v(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size());
  EXPECT_EQ(hash(v).to_hex(), golden()["sha256_abc"].get<std::string>());
  EXPECT_EQ(hash({}).to_hex(), golden()["sha256_empty"].get<std::string>());
  EXPECT_EQ(hash(v, HashAlgorithm::blake2b_256).to_hex(),
            golden()["blake2b256_abc"].get<std::string>());
  EXPECT_EQ(hash({}, HashAlgorithm::blake2b_256).to_hex(),
            golden()["blake2b256_empty"].get<std::string>());
}

TEST(Hash, AlgorithmNamesAndIds) {
  EXPECT_EQ(hash_algorithm_from_id(1), HashAlgorithm::sha256);
  EXPECT_EQ(hash_algorithm_from_id(2), HashAlgorithm::blake2b_256);
  EXPECT_FALSE(hash_algorithm_from_id(3).has_value());
  EXPECT_EQ(hash_algorithm_from_name("blake2b-256"), HashAlgorithm::blake2b_256);
  EXPECT_EQ(hash_algorithm_name(HashAlgorithm::sha256), "sha256");
  EXPECT_FALSE(hash_algorithm_from_name("md5").has_value());
}

}  // namespace
}  // namespace pote
