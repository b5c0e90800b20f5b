#include <gtest/gtest.h>

#include <json.hpp>

#include "persona/errors.h"
#include "persona/profile_io.h"
#include "test_support.h"

namespace persona {
namespace {

TEST(ProfileIo, EmptyProfileRoundTripsByteIdentically) {
  testing::TempDir dir;
  const auto path = dir / "p.json";
  save_profile(Profile{}, path);
  const std::string first = testing::read_file(path);
  const Profile loaded = load_profile(path);
  EXPECT_EQ(loaded, Profile{});
  save_profile(loaded, path);
  EXPECT_EQ(testing::read_file(path), first);
}

TEST(ProfileIo, HundredTopicProfileRoundTrips) {
  testing::Rng rng(2024);
  testing::TempDir dir;
  for (int i = 0; i < 5; ++i) {
    const Profile profile = testing::random_profile(rng, 100);
    ASSERT_EQ(profile.topic_graph.nodes().size(), 100u);
    const auto path = dir / ("p" + std::to_string(i) + ".json");
    save_profile(profile, path);
    const Profile loaded = load_profile(path);
    EXPECT_EQ(loaded, profile);
    EXPECT_EQ(serialize_profile(loaded), serialize_profile(profile));
  }
}

TEST(ProfileIo, RandomProfilesRoundTripInMemory) {
  testing::Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const Profile profile = testing::random_profile(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 30)));
    ASSERT_EQ(parse_profile(serialize_profile(profile)), profile);
  }
}

TEST(ProfileIo, TopLevelLayout) {
  testing::Rng rng(1);
  const auto doc = nlohmann::json::parse(serialize_profile(testing::random_profile(rng, 4)));
  for (const char* key : {"version", "wob_config", "visits", "keyword_db", "topic_graph", "url_grades",
                          "search_patterns", "offline_profile", "coefficients"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc["version"], 1);
  for (const auto& edge : doc["topic_graph"]["edges"]) {
    EXPECT_LT(edge["a"].get<std::string>(), edge["b"].get<std::string>());
    EXPECT_TRUE(edge["kind"] == "sim" || edge["kind"] == "link");
    EXPECT_TRUE(edge.contains("w"));
  }
}

TEST(ProfileIo, TruncatedFileIsParseErrorWithOffset) {
  testing::Rng rng(8);
  const std::string text = serialize_profile(testing::random_profile(rng, 5));
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 3, text.size() / 2, text.size() - 3}) {
    try {
      parse_profile(std::string_view(text).substr(0, cut));
      FAIL() << "truncated at " << cut << " parsed";
    } catch (const ParseError& e) {
      ASSERT_TRUE(e.byte_offset().has_value());
      EXPECT_LE(*e.byte_offset(), cut + 1);
    }
  }
}

TEST(ProfileIo, VersionMismatch) {
  EXPECT_THROW(parse_profile(R"({"version": 2})"), UnsupportedVersionError);
  try {
    parse_profile(R"({"version": 7})");
  } catch (const UnsupportedVersionError& e) {
    EXPECT_EQ(e.version(), 7);
  }
  EXPECT_THROW(parse_profile(R"({"wob_config": {}})"), ParseError);
}

TEST(ProfileIo, SchemaViolationsAreParseErrors) {
  auto doc = nlohmann::json::parse(serialize_profile(Profile{}));
  doc["coefficients"]["a"] = 0.9;
  EXPECT_THROW(parse_profile(doc.dump()), ParseError);

  doc = nlohmann::json::parse(serialize_profile(Profile{}));
  doc["keyword_db"] = "nope";
  EXPECT_THROW(parse_profile(doc.dump()), ParseError);
}

TEST(ProfileIo, LoadOrCreate) {
  testing::TempDir dir;
  EXPECT_EQ(load_or_create_profile(dir / "missing.json"), Profile{});
  EXPECT_THROW(load_profile(dir / "missing.json"), IoError);
  testing::write_file(dir / "bad.json", "{\"version\": 1,");
  EXPECT_THROW(load_or_create_profile(dir / "bad.json"), ParseError);
}

TEST(ProfileIo, SaveLeavesNoTemporaryBehind) {
  testing::TempDir dir;
  save_profile(Profile{}, dir / "p.json");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace persona
