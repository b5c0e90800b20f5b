#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "persona/profile_model.h"

namespace persona {

using StopwordSet = std::unordered_set<std::string>;

// Bundled English list (about 200 words).
std::shared_ptr<const StopwordSet> default_stopwords();
// One word per line; blank lines and lines starting with '#' are skipped.
std::shared_ptr<const StopwordSet> load_stopwords(const std::filesystem::path& path);

struct TokenizerConfig {
  std::size_t min_len = 3;  // in code points
  std::shared_ptr<const StopwordSet> stopwords = default_stopwords();
  // Optional stemming hook, applied to tokens that survive filtering.
  std::function<std::string(std::string_view)> stemmer;
};

// Lowercased Unicode words in document order; punctuation and spaces dropped.
std::vector<std::string> tokenize_words(std::string_view text);
std::size_t codepoint_length(std::string_view utf8);

// tokenize_words minus short tokens and stopwords, in order, duplicates kept.
std::vector<std::string> extract_terms(std::string_view text, const TokenizerConfig& config);
TermFrequencies extract_keywords(std::string_view text, const TokenizerConfig& config);

// Visible text of an HTML page. Title and meta description are emitted
// three times so they outweigh body text when counted.
std::string strip_html(std::string_view html);

inline constexpr int kTitleWeight = 3;

}  // namespace persona
