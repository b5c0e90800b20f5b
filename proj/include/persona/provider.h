#pragma once

// Sources of raw search results for the search bank.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace persona {

struct ProviderHit {
  std::string url;
  std::string title;
  std::string snippet;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;

  // Hits in the provider's order, best first. Throws ProviderError.
  virtual std::vector<ProviderHit> fetch(const std::string& query, std::size_t n) = 0;
  virtual std::string describe() const = 0;
};

// Canned results from a JSON file:
//   {"query": str, "results": [{"url", "title", "snippet"}, ...]}
// or an array of such objects. A query of "*" answers any query.
class FixtureProvider final : public SearchProvider {
 public:
  static FixtureProvider from_file(const std::filesystem::path& path);
  static FixtureProvider from_json_text(std::string_view text, std::string origin = "inline");

  std::vector<ProviderHit> fetch(const std::string& query, std::size_t n) override;
  std::string describe() const override { return "fixture:" + origin_; }

  const std::map<std::string, std::vector<ProviderHit>>& queries() const { return by_query_; }

 private:
  FixtureProvider() = default;

  std::string origin_;
  std::map<std::string, std::vector<ProviderHit>> by_query_;
};

struct HttpProviderConfig {
  // e.g. "http://localhost:8080/search?q={query}&n={n}"; {query} is URL-encoded.
  std::string url_template;
  std::string results_pointer = "/results";  // JSON pointer to the hit array
  std::string url_field = "url";
  std::string title_field = "title";
  std::string snippet_field = "snippet";
  int timeout_seconds = 10;
};

// Generic JSON-over-HTTP backend. Transport failures, 429 and 5xx are retryable.
class HttpProvider final : public SearchProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  std::vector<ProviderHit> fetch(const std::string& query, std::size_t n) override;
  std::string describe() const override { return config_.url_template; }

 private:
  HttpProviderConfig config_;
};

// "fixture:<file>" or "http:<url-template>" / "https:<url-template>"
// (the scheme prefix is part of the template). Throws ValidationError.
std::unique_ptr<SearchProvider> make_provider(std::string_view spec);

// Lowercased, whitespace-collapsed form used to match fixture queries.
std::string normalize_query_key(std::string_view query);

}  // namespace persona
