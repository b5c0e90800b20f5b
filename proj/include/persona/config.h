#pragma once

// Service/CLI configuration: a key=value file plus PERSONA_* environment
// overrides.
//
//   listen = 127.0.0.1:8080
//   profile = /var/lib/persona/profile.json
//   provider = fixture:results.json
//   coefficients = 0.2,0.2,0.2,0.1,0.2,0.1
//   wob.event_limit = 10000
//   wob.size_limit_bytes = 104857600
//   wob.freshness_factor = 0.9
//   tokenizer.min_len = 3
//   tokenizer.stopwords = /path/to/list.txt
//   keyword_epsilon = 70
//   bank_size = 100
//   writer_timeout_ms = 2000
//   cors_allowed_origins = http://localhost:5173,http://127.0.0.1:5173

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "persona/profile_model.h"
#include "persona/profile_update.h"

namespace persona {

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path profile_path = "persona_profile.json";
  std::string provider;
  std::optional<GradeCoefficients> coefficients;
  std::optional<std::uint64_t> wob_event_limit;
  std::optional<std::uint64_t> wob_size_limit_bytes;
  std::optional<double> wob_freshness_factor;
  std::size_t tokenizer_min_len = 3;
  std::optional<std::filesystem::path> stopwords_path;
  double keyword_epsilon = kDefaultKeywordEpsilon;
  std::size_t bank_size = 100;
  std::chrono::milliseconds writer_timeout{2000};
  std::vector<std::string> cors_allowed_origins;
};

// Unknown keys and bad values throw ValidationError naming the line.
ServiceConfig parse_service_config(std::string_view text);
ServiceConfig load_service_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// PERSONA_LISTEN, PERSONA_PROFILE, PERSONA_PROVIDER.
void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup = process_env);

// "host:port" -> (host, port). Throws ValidationError.
std::pair<std::string, int> split_listen(std::string_view listen);

EngineConfig engine_config(const ServiceConfig& config);
// Applies coefficient and WOB overrides from the config to a profile.
void apply_profile_overrides(const ServiceConfig& config, Profile& profile);

// "a,b,c,d,e,f" -> validated coefficients.
GradeCoefficients parse_coefficients(std::string_view text);

}  // namespace persona
