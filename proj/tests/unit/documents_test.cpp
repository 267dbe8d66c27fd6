#include <gtest/gtest.h>

#include "pote/documents.hpp"
#include "support.hpp"

namespace pote::docs {
namespace {

TEST(Documents, RegistryRoundTrip) {
  auto w = sim::build_world(test::small_scenario(), 1);
  auto reg = w.registry;
  reg.set_vendor_status(attestation::VendorId{3}, attestation::VendorStatus::revoked);
  auto back = registry_from_json(registry_to_json(reg));
  EXPECT_EQ(registry_to_json(back), registry_to_json(reg));
  EXPECT_EQ(back.find(attestation::VendorId{3})->status, attestation::VendorStatus::revoked);
  EXPECT_EQ(back.diversity_threshold(), 3u);
}

TEST(Documents, ContextRoundTrip) {
  auto ctx = context_from_json(read_text(test::fixture_dir() / "context.json"));
  EXPECT_EQ(context_from_json(context_to_json(ctx)), ctx);
  EXPECT_EQ(ctx.expected_height, 1u);
}

TEST(Documents, RejectsBadInput) {
  EXPECT_THROW(registry_from_json("[]"), ConfigInvalid);
  EXPECT_THROW(registry_from_json("not json"), ConfigInvalid);
  auto text = read_text(test::fixture_dir() / "registry.json");
  auto bad = text;
  bad.replace(bad.find("\"id\": 2"), 7, "\"id\": 5");
  EXPECT_THROW(registry_from_json(bad), ConfigInvalid);
  auto ctx = read_text(test::fixture_dir() / "context.json");
  ctx.replace(ctx.find("\"vendor_id\": "), 13, "\"vendor_id\": 0, \"x\": ");
  EXPECT_THROW(context_from_json(ctx), ConfigInvalid);
  EXPECT_THROW(read_binary("/nonexistent/file"), ConfigInvalid);
}

}  // namespace
}  // namespace pote::docs
