#pragma once

// Search bank, six-signal result grading, personalized ordering, click
// feedback and rank-shift evaluation.

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "persona/profile_model.h"
#include "persona/profile_update.h"
#include "persona/provider.h"
#include "persona/text.h"

namespace persona {

inline constexpr std::size_t kDefaultBankCapacity = 100;

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
  int web_rank = 0;  // 1 = provider's top hit

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

struct SearchBank {
  std::string query;
  std::vector<SearchResult> results;
  std::size_t capacity = kDefaultBankCapacity;
};

// Dedupes by URL (first occurrence wins), keeps the first n and numbers them
// 1..k. Provider errors propagate.
SearchBank fetch_results(const std::string& query, SearchProvider& provider, std::size_t n = kDefaultBankCapacity);
SearchBank make_bank(const std::string& query, std::span<const ProviderHit> hits,
                     std::size_t n = kDefaultBankCapacity);

// Title counted like an HTML title, plus the snippet.
TermFrequencies result_keywords(const SearchResult& result, const TokenizerConfig& tokenizer);

struct ResultGrade {
  std::string url;
  double u_g = 0.0;
  double k_w = 0.0;
  double t_v = 0.0;
  double o_v = 0.0;
  double w_r = 0.0;
  double s_g = 0.0;
  double grade = 0.0;
};

// Read-only view of a profile with the per-search lookups precomputed. The
// profile must outlive the context.
class RerankContext {
 public:
  explicit RerankContext(const Profile& profile, TokenizerConfig tokenizer = {});

  struct TopicView {
    std::string name;
    TermFrequencies terms;
    double value = 0.0;
  };
  struct PatternView {
    std::set<std::string> terms;
    double percentile = 0.0;
  };

  const Profile& profile() const { return *profile_; }
  const TokenizerConfig& tokenizer() const { return tokenizer_; }
  const std::vector<TopicView>& topics() const { return topics_; }
  double max_topic_value() const { return max_topic_value_; }
  const TermFrequencies& offline_terms() const { return offline_terms_; }
  const std::vector<PatternView>& patterns() const { return patterns_; }

 private:
  const Profile* profile_;
  TokenizerConfig tokenizer_;
  std::vector<TopicView> topics_;
  double max_topic_value_ = 0.0;
  TermFrequencies offline_terms_;
  std::vector<PatternView> patterns_;
};

// bank_size is n in the rank signal (n - web_rank + 1) / n.
ResultGrade grade_result(const SearchResult& result, const RerankContext& context, std::size_t bank_size);
ResultGrade grade_result(const SearchResult& result, const Profile& profile, std::size_t bank_size);

// Grades aligned with bank.results. The parallel version splits results
// across OpenMP threads; the serial one is the reference.
std::vector<ResultGrade> grade_bank(const SearchBank& bank, const RerankContext& context);
std::vector<ResultGrade> grade_bank_serial(const SearchBank& bank, const RerankContext& context);

using RankedResult = std::pair<SearchResult, ResultGrade>;

// Results with grade > threshold, best first, ties in provider order.
std::vector<RankedResult> rerank(const SearchBank& bank, const RerankContext& context, double threshold = 0.0);
std::vector<RankedResult> rerank(const SearchBank& bank, const Profile& profile, double threshold = 0.0);

// Records a click on a shown result: a Clicked visit, WOB regrade, and the
// result's title and snippet fed back as page keywords.
Profile record_click(Profile profile, const SearchResult& result, std::int64_t dwell_seconds, Timestamp now,
                     const EngineConfig& config = {});

struct RankShiftRow {
  std::string url;
  int original_rank = 0;
  std::optional<int> revised_rank;  // empty when filtered out by the threshold
  bool relevant = false;

  std::optional<int> shift() const;  // original - revised; positive means moved up
};

struct TopKHits {
  int k = 0;
  int original = 0;
  int revised = 0;
};

struct RankShiftReport {
  std::vector<RankShiftRow> rows;           // every bank result, in provider order
  std::vector<std::string> not_retrieved;   // relevant URLs the bank never had, sorted
  double mean_shift = 0.0;                  // over relevant rows that kept a revised rank
  std::vector<TopKHits> top_k;              // k = 1, 3, 5, 10

  // (revised, original) for each relevant result still in the personalized list.
  std::vector<std::pair<int, int>> relevant_pairs() const;
  // url,original_rank,revised_rank,shift,relevant
  std::string to_csv() const;
};

// Throws ValidationError when personalized is not a subset of the bank or
// repeats a URL.
RankShiftReport compare_rankings(const SearchBank& original, std::span<const SearchResult> personalized,
                                 const std::set<std::string>& relevant);

}  // namespace persona
