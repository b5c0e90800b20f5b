#pragma once

// Percentile machinery and the three grading passes: search patterns, URLs
// and keywords.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persona/profile_model.h"

namespace persona {

// percentile(i) = 100 * mean_rank(i) / n with ascending ranks 1..n, ties
// sharing the mean of their ranks. Output is aligned with the input.
// Throws ValidationError("empty population") on empty input.
std::vector<double> percentile_ranks(std::span<const double> values);

struct PercentileEntry {
  std::string id;
  double value = 0.0;
  double percentile = 0.0;
};

class PercentileTable {
 public:
  explicit PercentileTable(std::vector<PercentileEntry> entries) : entries_(std::move(entries)) {}

  // Same order as the population handed to percentile_rank.
  const std::vector<PercentileEntry>& entries() const { return entries_; }
  // Throws ValidationError for an unknown id.
  double percentile_of(const std::string& id) const;

 private:
  std::vector<PercentileEntry> entries_;
};

PercentileTable percentile_rank(std::span<const std::pair<std::string, double>> population);

// Sets percentile_grade from the frequency ranking.
std::vector<SearchQueryRecord> extract_search_patterns(std::vector<SearchQueryRecord> queries);

// Grade of every distinct URL in visits (the current window of observation).
std::map<std::string, UrlGrade> grade_urls(std::span<const VisitRecord> visits);

inline constexpr double kDefaultKeywordEpsilon = 70.0;

// Page terms whose page-local frequency percentile is strictly above epsilon.
TermFrequencies select_keywords(const TermFrequencies& page_keywords, double epsilon);
// Each selected term counts once: +1 when known, inserted with 1 otherwise.
// Percentiles are left stale; call regrade_keywords afterwards.
void merge_selected_keywords(KeywordDb& db, const TermFrequencies& selected);
void regrade_keywords(KeywordDb& db);

KeywordDb grade_keywords(const TermFrequencies& page_keywords, KeywordDb db,
                         double epsilon = kDefaultKeywordEpsilon);

}  // namespace persona
