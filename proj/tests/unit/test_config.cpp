#include <gtest/gtest.h>

#include <map>

#include "persona/config.h"
#include "persona/errors.h"
#include "test_support.h"

namespace persona {
namespace {

std::string error_of(std::string_view text) {
  try {
    parse_service_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ServiceConfig, Defaults) {
  const ServiceConfig config = parse_service_config("");
  EXPECT_EQ(config.listen, "127.0.0.1:8080");
  EXPECT_EQ(config.bank_size, 100u);
  EXPECT_EQ(config.keyword_epsilon, 70.0);
  EXPECT_EQ(config.writer_timeout.count(), 2000);
  EXPECT_FALSE(config.coefficients.has_value());
}

TEST(ServiceConfig, AllKeys) {
  const ServiceConfig config = parse_service_config(R"(
# comment
listen = 0.0.0.0:9000
profile = /tmp/p.json
provider = fixture:results.json
coefficients = 0.5, 0.1, 0.1, 0.1, 0.1, 0.1
wob.event_limit = 50
wob.size_limit_bytes = 4096
wob.freshness_factor = 0.8
tokenizer.min_len = 2
tokenizer.stopwords = /tmp/stop.txt
keyword_epsilon = 60
bank_size = 25
writer_timeout_ms = 150
cors_allowed_origins = http://localhost:5173, http://127.0.0.1:5173
)");
  EXPECT_EQ(config.listen, "0.0.0.0:9000");
  EXPECT_EQ(config.profile_path, "/tmp/p.json");
  EXPECT_EQ(config.provider, "fixture:results.json");
  EXPECT_EQ(config.coefficients->a(), 0.5);
  EXPECT_EQ(*config.wob_event_limit, 50u);
  EXPECT_EQ(*config.wob_size_limit_bytes, 4096u);
  EXPECT_EQ(*config.wob_freshness_factor, 0.8);
  EXPECT_EQ(config.tokenizer_min_len, 2u);
  EXPECT_EQ(*config.stopwords_path, "/tmp/stop.txt");
  EXPECT_EQ(config.keyword_epsilon, 60.0);
  EXPECT_EQ(config.bank_size, 25u);
  EXPECT_EQ(config.writer_timeout.count(), 150);
  EXPECT_EQ(config.cors_allowed_origins, (std::vector<std::string>{"http://localhost:5173", "http://127.0.0.1:5173"}));
}

TEST(ServiceConfig, ErrorsNameTheLine) {
  EXPECT_EQ(error_of("listen = 1.2.3.4:80\ncolour = blue"), "config line 2: unknown key 'colour'");
  EXPECT_EQ(error_of("no equals sign"), "config line 1: expected key = value");
  EXPECT_NE(error_of("bank_size = 0").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of("bank_size = lots").find("bank_size"), std::string::npos);
  EXPECT_NE(error_of("coefficients = 0.5,0.5,0.5,0,0,0").find("sum to 1"), std::string::npos);
  EXPECT_NE(error_of("coefficients = 1,0").find("6 coefficients"), std::string::npos);
  EXPECT_NE(error_of("listen = nowhere").find("host:port"), std::string::npos);
}

TEST(ServiceConfig, LoadFromFile) {
  testing::TempDir dir;
  testing::write_file(dir / "persona.conf", "bank_size = 7\n");
  EXPECT_EQ(load_service_config(dir / "persona.conf").bank_size, 7u);
  EXPECT_THROW(load_service_config(dir / "missing.conf"), IoError);
}

TEST(EnvOverrides, ReplaceFileValues) {
  ServiceConfig config = parse_service_config("listen = 127.0.0.1:1\nprovider = fixture:a.json");
  const std::map<std::string, std::string> env = {{"PERSONA_LISTEN", "127.0.0.1:2"},
                                                  {"PERSONA_PROFILE", "/tmp/env.json"}};
  apply_env_overrides(config, [&](const std::string& name) -> std::optional<std::string> {
    if (const auto it = env.find(name); it != env.end()) return it->second;
    return std::nullopt;
  });
  EXPECT_EQ(config.listen, "127.0.0.1:2");
  EXPECT_EQ(config.profile_path, "/tmp/env.json");
  EXPECT_EQ(config.provider, "fixture:a.json");

  EXPECT_THROW(apply_env_overrides(config, [](const std::string&) -> std::optional<std::string> { return "bad"; }),
               ValidationError);
}

TEST(SplitListen, Forms) {
  EXPECT_EQ(split_listen("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_EQ(split_listen("[::1]:0"), (std::pair<std::string, int>{"::1", 0}));
  EXPECT_THROW(split_listen("host:70000"), ValidationError);
  EXPECT_THROW(split_listen(":80"), ValidationError);
  EXPECT_THROW(split_listen("host:"), ValidationError);
}

TEST(ProfileOverrides, CoefficientsAndWob) {
  ServiceConfig config = parse_service_config("coefficients = 0,0,0,0,1,0\nwob.event_limit = 5");
  Profile profile;
  apply_profile_overrides(config, profile);
  EXPECT_EQ(profile.coefficients.e(), 1.0);
  EXPECT_EQ(profile.wob_config.event_limit, 5u);

  config = parse_service_config("wob.freshness_factor = 1.5");
  Profile untouched;
  EXPECT_THROW(apply_profile_overrides(config, untouched), ValidationError);
  EXPECT_EQ(untouched.wob_config, WobConfig{});
}

TEST(EngineConfig, TokenizerSettings) {
  testing::TempDir dir;
  testing::write_file(dir / "stop.txt", "banana\n");
  ServiceConfig config = parse_service_config("tokenizer.min_len = 5\nkeyword_epsilon = 50");
  config.stopwords_path = dir / "stop.txt";
  const EngineConfig engine = engine_config(config);
  EXPECT_EQ(engine.tokenizer.min_len, 5u);
  EXPECT_EQ(engine.keyword_epsilon, 50.0);
  EXPECT_EQ(extract_keywords("banana bread apple pie", engine.tokenizer), (TermFrequencies{{"apple", 1}, {"bread", 1}}));
}

}  // namespace
}  // namespace persona
