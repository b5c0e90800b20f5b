#include "persona/grading.h"

#include <algorithm>
#include <numeric>

#include "persona/errors.h"

namespace persona {

std::vector<double> percentile_ranks(std::span<const double> values) {
  if (values.empty()) throw ValidationError("empty population");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> percentiles(n);
  const double population = static_cast<double>(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    // Ranks start+1 .. end share their mean.
    const double mean_rank = static_cast<double>(start + 1 + end) / 2.0;
    const double percentile = 100.0 * mean_rank / population;
    for (std::size_t k = start; k < end; ++k) percentiles[order[k]] = percentile;
    start = end;
  }
  return percentiles;
}

double PercentileTable::percentile_of(const std::string& id) const {
  for (const auto& entry : entries_) {
    if (entry.id == id) return entry.percentile;
  }
  throw ValidationError("unknown item " + id);
}

PercentileTable percentile_rank(std::span<const std::pair<std::string, double>> population) {
  std::vector<double> values;
  values.reserve(population.size());
  for (const auto& [id, value] : population) values.push_back(value);
  const auto percentiles = percentile_ranks(values);

  std::vector<PercentileEntry> entries;
  entries.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    entries.push_back({population[i].first, population[i].second, percentiles[i]});
  }
  return PercentileTable(std::move(entries));
}

std::vector<SearchQueryRecord> extract_search_patterns(std::vector<SearchQueryRecord> queries) {
  if (queries.empty()) return queries;
  std::vector<double> frequencies;
  frequencies.reserve(queries.size());
  for (const auto& q : queries) frequencies.push_back(static_cast<double>(q.frequency));
  const auto grades = percentile_ranks(frequencies);
  for (std::size_t i = 0; i < queries.size(); ++i) queries[i].percentile_grade = grades[i];
  return queries;
}

std::map<std::string, UrlGrade> grade_urls(std::span<const VisitRecord> visits) {
  struct Aggregate {
    double count = 0;
    double duration = 0;
    bool typed = false;
    Timestamp newest = 0;
  };
  std::map<std::string, Aggregate> per_url;
  for (const auto& visit : visits) {
    Aggregate& agg = per_url[visit.url];
    agg.count += 1;
    agg.duration += static_cast<double>(visit.duration);
    agg.typed = agg.typed || visit.transition == Transition::kTyped;
    agg.newest = std::max(agg.newest, visit.last_modified_time);
  }

  std::map<std::string, UrlGrade> grades;
  if (per_url.empty()) return grades;

  std::vector<double> counts, durations, recency;
  for (const auto& [url, agg] : per_url) {
    counts.push_back(agg.count);
    durations.push_back(agg.duration);
    recency.push_back(static_cast<double>(agg.newest));
  }
  const auto count_pct = percentile_ranks(counts);
  const auto duration_pct = percentile_ranks(durations);
  const auto fresh_pct = percentile_ranks(recency);

  std::size_t i = 0;
  for (const auto& [url, agg] : per_url) {
    UrlGrade grade;
    grade.url = url;
    grade.frequency_pct = count_pct[i] / 100.0;
    grade.duration_pct = duration_pct[i] / 100.0;
    grade.typed = agg.typed ? 1 : 0;
    grade.freshness_value = fresh_pct[i] / 100.0;
    grade.total = (grade.frequency_pct + grade.duration_pct + grade.typed) * grade.freshness_value;
    grades.emplace(url, std::move(grade));
    ++i;
  }
  return grades;
}

TermFrequencies select_keywords(const TermFrequencies& page_keywords, double epsilon) {
  TermFrequencies selected;
  if (page_keywords.empty()) return selected;
  std::vector<double> frequencies;
  frequencies.reserve(page_keywords.size());
  for (const auto& [term, frequency] : page_keywords) frequencies.push_back(static_cast<double>(frequency));
  const auto percentiles = percentile_ranks(frequencies);
  std::size_t i = 0;
  for (const auto& [term, frequency] : page_keywords) {
    if (percentiles[i++] > epsilon) selected.emplace(term, frequency);
  }
  return selected;
}

void merge_selected_keywords(KeywordDb& db, const TermFrequencies& selected) {
  for (const auto& [term, frequency] : selected) {
    auto [it, inserted] = db.try_emplace(term, KeywordEntry{term, 1, 0.0});
    if (!inserted) it->second.frequency += 1;
  }
}

void regrade_keywords(KeywordDb& db) {
  if (db.empty()) return;
  std::vector<double> frequencies;
  frequencies.reserve(db.size());
  for (const auto& [term, entry] : db) frequencies.push_back(static_cast<double>(entry.frequency));
  const auto percentiles = percentile_ranks(frequencies);
  std::size_t i = 0;
  for (auto& [term, entry] : db) entry.percentile_grade = percentiles[i++];
}

KeywordDb grade_keywords(const TermFrequencies& page_keywords, KeywordDb db, double epsilon) {
  const auto selected = select_keywords(page_keywords, epsilon);
  if (selected.empty()) return db;
  merge_selected_keywords(db, selected);
  regrade_keywords(db);
  return db;
}

}  // namespace persona
