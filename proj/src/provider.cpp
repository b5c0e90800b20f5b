#include "persona/provider.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "persona/errors.h"
#include "persona/url.h"

namespace persona {

using nlohmann::json;

std::string normalize_query_key(std::string_view query) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : query) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// ---------------------------------------------------------------------------

FixtureProvider FixtureProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read fixture " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), path.string());
}

FixtureProvider FixtureProvider::from_json_text(std::string_view text, std::string origin) {
  FixtureProvider provider;
  provider.origin_ = std::move(origin);
  try {
    const json doc = json::parse(text.begin(), text.end());
    const auto add = [&](const json& entry) {
      std::vector<ProviderHit> hits;
      for (const auto& item : entry.at("results")) {
        hits.push_back({item.at("url").get<std::string>(), item.value("title", std::string{}),
                        item.value("snippet", std::string{})});
      }
      provider.by_query_[normalize_query_key(entry.at("query").get<std::string>())] = std::move(hits);
    };
    if (doc.is_array()) {
      for (const auto& entry : doc) add(entry);
    } else {
      add(doc);
    }
  } catch (const json::exception& e) {
    throw ValidationError("bad fixture " + provider.origin_ + ": " + e.what());
  }
  return provider;
}

std::vector<ProviderHit> FixtureProvider::fetch(const std::string& query, std::size_t n) {
  auto it = by_query_.find(normalize_query_key(query));
  if (it == by_query_.end()) it = by_query_.find("*");
  if (it == by_query_.end()) throw ProviderError("fixture has no results for query '" + query + "'", false);
  const auto& hits = it->second;
  return {hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(std::min(n, hits.size()))};
}

// ---------------------------------------------------------------------------

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const auto parsed = parse_url(config_.url_template);
  if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https")) {
    throw ValidationError("http provider needs an http(s) URL template");
  }
}

std::vector<ProviderHit> HttpProvider::fetch(const std::string& query, std::size_t n) {
  std::string target = config_.url_template;
  const auto substitute = [&](std::string_view placeholder, const std::string& value) {
    for (auto pos = target.find(placeholder); pos != std::string::npos;
         pos = target.find(placeholder, pos + value.size())) {
      target.replace(pos, placeholder.size(), value);
    }
  };
  substitute("{query}", percent_encode(query));
  substitute("{n}", std::to_string(n));

  const auto scheme_end = target.find("://");
  const auto path_start = target.find('/', scheme_end + 3);
  const std::string origin = target.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : target.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  auto response = client.Get(path);
  if (!response) {
    throw ProviderError("search backend unreachable: " + httplib::to_string(response.error()), true);
  }
  if (response->status != 200) {
    const bool retryable = response->status == 429 || response->status >= 500;
    throw ProviderError("search backend returned HTTP " + std::to_string(response->status), retryable);
  }

  std::vector<ProviderHit> hits;
  try {
    const json doc = json::parse(response->body);
    const json& items = doc.at(json::json_pointer(config_.results_pointer));
    for (const auto& item : items) {
      if (hits.size() >= n) break;
      hits.push_back({item.at(config_.url_field).get<std::string>(), item.value(config_.title_field, std::string{}),
                      item.value(config_.snippet_field, std::string{})});
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected search backend response: ") + e.what(), false);
  }
  return hits;
}

// ---------------------------------------------------------------------------

std::unique_ptr<SearchProvider> make_provider(std::string_view spec) {
  if (spec.starts_with("fixture:")) {
    return std::make_unique<FixtureProvider>(FixtureProvider::from_file(std::string(spec.substr(8))));
  }
  if (spec.starts_with("http:") || spec.starts_with("https:")) {
    HttpProviderConfig config;
    config.url_template = std::string(spec);
    return std::make_unique<HttpProvider>(std::move(config));
  }
  throw ValidationError("unknown provider spec '" + std::string(spec) + "' (expected fixture:<file> or http(s)://...)");
}

}  // namespace persona
