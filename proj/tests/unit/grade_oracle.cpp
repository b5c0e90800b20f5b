#include "grade_oracle.h"

#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace persona::testing {

namespace {

void count_words(const std::string& text, int weight, std::map<std::string, double>& counts) {
  std::string word;
  for (char ch : text + " ") {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!word.empty()) {
      counts[word] += weight;
      word.clear();
    }
  }
}

double cosine(const std::map<std::string, double>& x, const std::map<std::string, double>& y) {
  std::set<std::string> all;
  for (const auto& [t, v] : x) all.insert(t);
  for (const auto& [t, v] : y) all.insert(t);
  double dot = 0, nx = 0, ny = 0;
  for (const auto& t : all) {
    const double a = x.contains(t) ? x.at(t) : 0.0;
    const double b = y.contains(t) ? y.at(t) : 0.0;
    dot += a * b;
    nx += a * a;
    ny += b * b;
  }
  if (nx == 0 || ny == 0) return 0.0;
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

}  // namespace

OracleGrade oracle_grade(const SearchResult& result, const Profile& profile, std::size_t bank_size) {
  std::map<std::string, double> tokens;
  count_words(result.title, 3, tokens);
  count_words(result.snippet, 1, tokens);

  OracleGrade g;
  if (profile.url_grades.contains(result.url)) g.u_g = profile.url_grades.at(result.url).total / 3.0;

  if (!tokens.empty()) {
    double sum = 0;
    for (const auto& [t, c] : tokens) {
      if (profile.keyword_db.contains(t)) sum += profile.keyword_db.at(t).percentile_grade / 100.0;
    }
    g.k_w = sum / static_cast<double>(tokens.size());
  }

  double max_value = 0;
  double best_sim = 0;
  double best_value = 0;
  for (const auto& [name, node] : profile.topic_graph.nodes()) {
    const double value = 0.75 * (node.weight_present + node.weight_prev) + 0.25 * node.weight_old;
    if (value > max_value) max_value = value;
    std::map<std::string, double> topic_terms;
    for (const auto& e : node.keyword_tree.entries()) topic_terms[e.term] = static_cast<double>(e.frequency);
    const double s = cosine(topic_terms, tokens);
    if (s > best_sim + 1e-15 || (std::abs(s - best_sim) <= 1e-15 && s > 0 && value > best_value)) {
      best_sim = s;
      best_value = value;
    }
  }
  if (max_value > 0 && best_sim > 0) g.t_v = best_value / max_value;

  std::map<std::string, double> offline;
  for (const auto& [t, e] : profile.offline_profile) offline[t] = static_cast<double>(e.frequency);
  g.o_v = cosine(tokens, offline);

  const double n = static_cast<double>(bank_size);
  g.w_r = (n - result.web_rank + 1) / n;

  for (const auto& pattern : profile.search_patterns) {
    bool all = !pattern.terms.empty();
    for (const auto& t : pattern.terms) all = all && tokens.contains(t);
    if (all) g.s_g = std::max(g.s_g, pattern.percentile_grade / 100.0);
  }

  const auto& c = profile.coefficients.values();
  g.grade = c[0] * g.u_g + c[1] * g.k_w + c[2] * g.t_v + c[3] * g.o_v + c[4] * g.w_r + c[5] * g.s_g;
  return g;
}

SearchBank random_bank(Rng& rng, const Profile& profile, std::size_t n) {
  std::vector<std::string> known;
  for (const auto& [t, e] : profile.keyword_db) known.push_back(t);
  for (const auto& [t, e] : profile.offline_profile) known.push_back(t);
  std::vector<std::string> graded_urls;
  for (const auto& [url, g] : profile.url_grades) graded_urls.push_back(url);

  const auto pick_word = [&] {
    if (!known.empty() && uniform_int(rng, 0, 2) > 0) {
      return known[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(known.size()) - 1))];
    }
    return random_word(rng, 4, 8);
  };

  SearchBank bank;
  bank.query = "random";
  bank.capacity = n;
  std::set<std::string> used;
  for (std::size_t i = 0; i < n; ++i) {
    SearchResult r;
    if (!graded_urls.empty() && uniform_int(rng, 0, 3) == 0) {
      r.url = graded_urls[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(graded_urls.size()) - 1))];
    }
    if (r.url.empty() || used.contains(r.url)) r.url = "https://result.example/" + std::to_string(i);
    used.insert(r.url);
    const auto title_words = uniform_int(rng, 1, 5);
    for (std::int64_t w = 0; w < title_words; ++w) r.title += (w ? " " : "") + pick_word();
    const auto snippet_words = uniform_int(rng, 0, 12);
    for (std::int64_t w = 0; w < snippet_words; ++w) r.snippet += (w ? " " : "") + pick_word();
    r.web_rank = static_cast<int>(i) + 1;
    bank.results.push_back(std::move(r));
  }
  return bank;
}

}  // namespace persona::testing
