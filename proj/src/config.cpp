#include "persona/config.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "persona/errors.h"

namespace persona {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) parts.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ValidationError("invalid number for " + what + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

GradeCoefficients parse_coefficients(std::string_view text) {
  const auto parts = split_list(text);
  if (parts.size() != 6) throw ValidationError("expected 6 coefficients a,b,c,d,e,f");
  std::array<double, 6> v{};
  for (std::size_t i = 0; i < 6; ++i) v[i] = parse_number<double>(parts[i], "coefficient");
  return GradeCoefficients(v[0], v[1], v[2], v[3], v[4], v[5]);
}

ServiceConfig parse_service_config(std::string_view text) {
  ServiceConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key(trim(content.substr(0, eq)));
    const std::string_view value = trim(content.substr(eq + 1));
    try {
      if (key == "listen") {
        split_listen(value);
        config.listen = std::string(value);
      } else if (key == "profile") {
        config.profile_path = std::string(value);
      } else if (key == "provider") {
        config.provider = std::string(value);
      } else if (key == "coefficients") {
        config.coefficients = parse_coefficients(value);
      } else if (key == "wob.event_limit") {
        config.wob_event_limit = parse_number<std::uint64_t>(value, key);
      } else if (key == "wob.size_limit_bytes") {
        config.wob_size_limit_bytes = parse_number<std::uint64_t>(value, key);
      } else if (key == "wob.freshness_factor") {
        config.wob_freshness_factor = parse_number<double>(value, key);
      } else if (key == "tokenizer.min_len") {
        config.tokenizer_min_len = parse_number<std::size_t>(value, key);
      } else if (key == "tokenizer.stopwords") {
        config.stopwords_path = std::string(value);
      } else if (key == "keyword_epsilon") {
        config.keyword_epsilon = parse_number<double>(value, key);
      } else if (key == "bank_size") {
        config.bank_size = parse_number<std::size_t>(value, key);
        if (config.bank_size == 0) throw ValidationError("bank_size must be positive");
      } else if (key == "writer_timeout_ms") {
        config.writer_timeout = std::chrono::milliseconds(parse_number<long>(value, key));
      } else if (key == "cors_allowed_origins") {
        config.cors_allowed_origins = split_list(value);
      } else {
        throw ValidationError("unknown key '" + key + "'");
      }
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return config;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_service_config(buffer.str());
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* value = std::getenv(name.c_str()); value != nullptr && *value != '\0') return std::string(value);
  return std::nullopt;
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup) {
  if (auto v = lookup("PERSONA_LISTEN")) {
    split_listen(*v);
    config.listen = *v;
  }
  if (auto v = lookup("PERSONA_PROFILE")) config.profile_path = *v;
  if (auto v = lookup("PERSONA_PROVIDER")) config.provider = *v;
}

std::pair<std::string, int> split_listen(std::string_view listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ValidationError("listen address must be host:port, got '" + std::string(listen) + "'");
  }
  std::string host(listen.substr(0, colon));
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  const int port = parse_number<int>(listen.substr(colon + 1), "port");
  if (port < 0 || port > 65535) throw ValidationError("port out of range");
  return {host, port};
}

EngineConfig engine_config(const ServiceConfig& config) {
  EngineConfig engine;
  engine.tokenizer.min_len = config.tokenizer_min_len;
  if (config.stopwords_path) engine.tokenizer.stopwords = load_stopwords(*config.stopwords_path);
  engine.keyword_epsilon = config.keyword_epsilon;
  return engine;
}

void apply_profile_overrides(const ServiceConfig& config, Profile& profile) {
  if (config.coefficients) profile.coefficients = *config.coefficients;
  WobConfig wob = profile.wob_config;
  if (config.wob_event_limit) wob.event_limit = *config.wob_event_limit;
  if (config.wob_size_limit_bytes) wob.size_limit_bytes = *config.wob_size_limit_bytes;
  if (config.wob_freshness_factor) wob.freshness_factor = *config.wob_freshness_factor;
  wob.validate();
  profile.wob_config = wob;
}

}  // namespace persona
