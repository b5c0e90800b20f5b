#include "persona/reranker.h"

#include <algorithm>
#include <exception>
#include <map>
#include <numeric>

#include "persona/errors.h"
#include "persona/topic_engine.h"

namespace persona {

SearchBank make_bank(const std::string& query, std::span<const ProviderHit> hits, std::size_t n) {
  SearchBank bank;
  bank.query = query;
  bank.capacity = n;
  std::set<std::string> seen;
  for (const auto& hit : hits) {
    if (bank.results.size() >= n) break;
    if (!seen.insert(hit.url).second) continue;
    bank.results.push_back({hit.url, hit.title, hit.snippet, static_cast<int>(bank.results.size()) + 1});
  }
  return bank;
}

SearchBank fetch_results(const std::string& query, SearchProvider& provider, std::size_t n) {
  if (n == 0) throw ValidationError("bank size must be positive");
  // Ask for a little more than n so duplicates don't shrink the bank.
  const auto hits = provider.fetch(query, n + n / 4 + 1);
  return make_bank(query, hits, n);
}

TermFrequencies result_keywords(const SearchResult& result, const TokenizerConfig& tokenizer) {
  std::string text;
  for (int i = 0; i < kTitleWeight; ++i) {
    text += result.title;
    text += '\n';
  }
  text += result.snippet;
  return extract_keywords(text, tokenizer);
}

RerankContext::RerankContext(const Profile& profile, TokenizerConfig tokenizer)
    : profile_(&profile), tokenizer_(std::move(tokenizer)) {
  for (const auto& [name, node] : profile.topic_graph.nodes()) {
    const double value = topic_value(node);
    topics_.push_back({name, node.keyword_tree.frequencies(), value});
    max_topic_value_ = std::max(max_topic_value_, value);
  }
  for (const auto& [term, entry] : profile.offline_profile) offline_terms_[term] = entry.frequency;
  for (const auto& pattern : profile.search_patterns) {
    if (pattern.terms.empty()) continue;
    patterns_.push_back({{pattern.terms.begin(), pattern.terms.end()}, pattern.percentile_grade});
  }
}

ResultGrade grade_result(const SearchResult& result, const RerankContext& context, std::size_t bank_size) {
  const Profile& profile = context.profile();
  const TermFrequencies terms = result_keywords(result, context.tokenizer());

  ResultGrade g;
  g.url = result.url;

  if (const auto it = profile.url_grades.find(result.url); it != profile.url_grades.end()) {
    g.u_g = it->second.total / 3.0;
  }

  // Unknown tokens count as zero, so learning a new token can only raise it.
  if (!terms.empty()) {
    double sum = 0.0;
    for (const auto& [term, count] : terms) {
      if (const auto it = profile.keyword_db.find(term); it != profile.keyword_db.end()) {
        sum += it->second.percentile_grade / 100.0;
      }
    }
    g.k_w = sum / static_cast<double>(terms.size());
  }

  if (context.max_topic_value() > 0.0 && !terms.empty()) {
    double best_similarity = 0.0;
    double best_value = 0.0;
    for (const auto& topic : context.topics()) {
      const double s = cosine_similarity(topic.terms, terms);
      // Equal cosines can differ in the last bits depending on the vectors;
      // treat them as a tie and prefer the more valuable topic.
      const double tolerance = 1e-12 * std::max(s, best_similarity);
      if (s > best_similarity + tolerance ||
          (s > 0.0 && s >= best_similarity - tolerance && topic.value > best_value)) {
        best_similarity = s;
        best_value = topic.value;
      }
    }
    if (best_similarity > 0.0) g.t_v = best_value / context.max_topic_value();
  }

  g.o_v = cosine_similarity(terms, context.offline_terms());

  if (bank_size > 0 && result.web_rank >= 1 && static_cast<std::size_t>(result.web_rank) <= bank_size) {
    const double n = static_cast<double>(bank_size);
    g.w_r = (n - result.web_rank + 1) / n;
  }

  for (const auto& pattern : context.patterns()) {
    const bool contained = std::all_of(pattern.terms.begin(), pattern.terms.end(),
                                       [&](const std::string& t) { return terms.contains(t); });
    if (contained) g.s_g = std::max(g.s_g, pattern.percentile / 100.0);
  }

  const auto& c = profile.coefficients;
  g.grade = c.a() * g.u_g + c.b() * g.k_w + c.c() * g.t_v + c.d() * g.o_v + c.e() * g.w_r + c.f() * g.s_g;
  return g;
}

ResultGrade grade_result(const SearchResult& result, const Profile& profile, std::size_t bank_size) {
  return grade_result(result, RerankContext(profile), bank_size);
}

std::vector<ResultGrade> grade_bank_serial(const SearchBank& bank, const RerankContext& context) {
  std::vector<ResultGrade> grades;
  grades.reserve(bank.results.size());
  for (const auto& result : bank.results) grades.push_back(grade_result(result, context, bank.results.size()));
  return grades;
}

std::vector<ResultGrade> grade_bank(const SearchBank& bank, const RerankContext& context) {
  const auto count = static_cast<std::ptrdiff_t>(bank.results.size());
  std::vector<ResultGrade> grades(bank.results.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      grades[i] = grade_result(bank.results[i], context, bank.results.size());
    } catch (...) {
#pragma omp critical(persona_grade_bank)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return grades;
}

std::vector<RankedResult> rerank(const SearchBank& bank, const RerankContext& context, double threshold) {
  const auto grades = grade_bank(bank, context);
  std::vector<RankedResult> ranked;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i].grade > threshold) ranked.emplace_back(bank.results[i], grades[i]);
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedResult& x, const RankedResult& y) {
    if (x.second.grade != y.second.grade) return x.second.grade > y.second.grade;
    return x.first.web_rank < y.first.web_rank;
  });
  return ranked;
}

std::vector<RankedResult> rerank(const SearchBank& bank, const Profile& profile, double threshold) {
  return rerank(bank, RerankContext(profile), threshold);
}

Profile record_click(Profile profile, const SearchResult& result, std::int64_t dwell_seconds, Timestamp now,
                     const EngineConfig& config) {
  VisitRecord visit{result.url, result.title, now, dwell_seconds, Transition::kClicked, now};
  validate_visit(visit);
  profile.visits.present.push_back(std::move(visit));
  regrade_current_wob(profile, config);
  observe_page(profile, result.url, result_keywords(result, config.tokenizer), {}, config);
  if (rotation_due(profile)) profile = rotate_and_regrade(std::move(profile), config);
  return profile;
}

// ---------------------------------------------------------------------------

std::optional<int> RankShiftRow::shift() const {
  if (!revised_rank) return std::nullopt;
  return original_rank - *revised_rank;
}

std::vector<std::pair<int, int>> RankShiftReport::relevant_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& row : rows) {
    if (row.relevant && row.revised_rank) pairs.emplace_back(*row.revised_rank, row.original_rank);
  }
  return pairs;
}

namespace {

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string RankShiftReport::to_csv() const {
  std::string out = "url,original_rank,revised_rank,shift,relevant\n";
  for (const auto& row : rows) {
    out += csv_field(row.url);
    out += ',' + std::to_string(row.original_rank) + ',';
    if (row.revised_rank) out += std::to_string(*row.revised_rank);
    out += ',';
    if (const auto s = row.shift()) out += std::to_string(*s);
    out += row.relevant ? ",1\n" : ",0\n";
  }
  for (const auto& url : not_retrieved) out += csv_field(url) + ",,,,1\n";
  return out;
}

RankShiftReport compare_rankings(const SearchBank& original, std::span<const SearchResult> personalized,
                                 const std::set<std::string>& relevant) {
  std::map<std::string, int> original_rank;
  for (const auto& result : original.results) original_rank.emplace(result.url, result.web_rank);

  std::map<std::string, int> revised_rank;
  for (std::size_t i = 0; i < personalized.size(); ++i) {
    const std::string& url = personalized[i].url;
    if (!original_rank.contains(url)) throw ValidationError("personalized result not in bank: " + url);
    if (!revised_rank.emplace(url, static_cast<int>(i) + 1).second) {
      throw ValidationError("personalized list repeats " + url);
    }
  }

  RankShiftReport report;
  std::vector<const SearchResult*> ordered;
  for (const auto& result : original.results) ordered.push_back(&result);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SearchResult* x, const SearchResult* y) { return x->web_rank < y->web_rank; });

  double shift_sum = 0.0;
  int shift_count = 0;
  for (const SearchResult* result : ordered) {
    RankShiftRow row;
    row.url = result->url;
    row.original_rank = result->web_rank;
    if (const auto it = revised_rank.find(result->url); it != revised_rank.end()) row.revised_rank = it->second;
    row.relevant = relevant.contains(result->url);
    if (row.relevant && row.revised_rank) {
      shift_sum += *row.shift();
      ++shift_count;
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& url : relevant) {
    if (!original_rank.contains(url)) report.not_retrieved.push_back(url);
  }
  report.mean_shift = shift_count > 0 ? shift_sum / shift_count : 0.0;

  for (int k : {1, 3, 5, 10}) {
    TopKHits hits{k, 0, 0};
    for (const auto& row : report.rows) {
      if (!row.relevant) continue;
      if (row.original_rank <= k) ++hits.original;
      if (row.revised_rank && *row.revised_rank <= k) ++hits.revised;
    }
    report.top_k.push_back(hits);
  }
  return report;
}

}  // namespace persona
