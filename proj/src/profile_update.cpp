#include "persona/profile_update.h"

#include <algorithm>

#include "persona/errors.h"
#include "persona/url.h"

namespace persona {

namespace {

// Keyword DB percentiles are refreshed once per batch, not per page.
std::string observe_page_unregraded(Profile& profile, const std::string& url, const TermFrequencies& page_keywords,
                                    std::span<const std::string> out_links, const EngineConfig& config) {
  const TermFrequencies selected = select_keywords(page_keywords, config.keyword_epsilon);
  if (selected.empty()) return {};
  merge_selected_keywords(profile.keyword_db, selected);

  PageDigest digest;
  digest.url = url;
  digest.keyword_tree = build_keyword_tree(selected);
  digest.out_links.assign(out_links.begin(), out_links.end());
  if (const auto it = profile.url_grades.find(url); it != profile.url_grades.end()) {
    digest.frequency_pct = it->second.frequency_pct;
    digest.duration_pct = it->second.duration_pct;
  }
  AssimilationOutcome outcome;
  profile.topic_graph = assimilate_page(std::move(profile.topic_graph), digest, config.assimilation, &outcome);
  return outcome.topic;
}

}  // namespace

void regrade_current_wob(Profile& profile, const EngineConfig& config) {
  const auto visits = current_wob_visits(profile);
  profile.url_grades = grade_urls(visits);
  profile.search_patterns =
      extract_search_patterns(extract_search_queries(visits, config.search_engines, config.tokenizer));
}

TermFrequencies visit_page_keywords(const VisitRecord& visit, const TokenizerConfig& tokenizer) {
  std::string text;
  for (int i = 0; i < kTitleWeight; ++i) {
    text += visit.title;
    text += '\n';
  }
  if (const auto parsed = parse_url(visit.url)) {
    std::string path = percent_decode(parsed->path, false);
    std::replace_if(path.begin(), path.end(), [](char c) { return c == '/' || c == '_' || c == '-' || c == '.'; }, ' ');
    text += path;
  }
  return extract_keywords(text, tokenizer);
}

std::string observe_page(Profile& profile, const std::string& url, const TermFrequencies& page_keywords,
                         std::span<const std::string> out_links, const EngineConfig& config) {
  std::string topic = observe_page_unregraded(profile, url, page_keywords, out_links, config);
  regrade_keywords(profile.keyword_db);
  return topic;
}

IngestReport ingest_visits(Profile& profile, std::span<const VisitRecord> visits, const EngineConfig& config) {
  for (const auto& visit : visits) validate_visit(visit);
  IngestReport report;
  std::size_t next = 0;
  while (next < visits.size()) {
    // Fill the Present band up to the rotation trigger.
    const std::size_t chunk_begin = profile.visits.present.size();
    while (next < visits.size() && !rotation_due(profile)) {
      profile.visits.present.push_back(visits[next]);
      ++next;
      ++report.accepted;
    }
    regrade_current_wob(profile, config);
    for (std::size_t i = chunk_begin; i < profile.visits.present.size(); ++i) {
      const VisitRecord& visit = profile.visits.present[i];
      observe_page_unregraded(profile, visit.url, visit_page_keywords(visit, config.tokenizer), {}, config);
    }
    regrade_keywords(profile.keyword_db);
    if (rotation_due(profile)) {
      profile = rotate_and_regrade(std::move(profile), config);
      ++report.rotations;
    }
  }
  return report;
}

void ingest_documents(Profile& profile, std::span<const DocumentRecord> documents, const EngineConfig& config) {
  for (const auto& doc : documents) {
    for (const auto& [term, frequency] : extract_keywords(doc.extracted_text, config.tokenizer)) {
      auto [it, inserted] = profile.offline_profile.try_emplace(term, KeywordEntry{term, 0, 0.0});
      it->second.frequency += frequency;
    }
  }
  regrade_keywords(profile.offline_profile);
}

Profile rotate_and_regrade(Profile profile, const EngineConfig& config) {
  profile = rotate_wob(std::move(profile));
  regrade_current_wob(profile, config);
  return profile;
}

bool remove_keyword(Profile& profile, const std::string& term) {
  if (profile.keyword_db.erase(term) == 0) return false;

  // Each pass strips the term from one topic. A fold merges a term-free tree
  // into its target, so the number of holders strictly drops.
  for (;;) {
    const auto& nodes = profile.topic_graph.nodes();
    const auto holder = std::find_if(nodes.begin(), nodes.end(),
                                     [&](const auto& item) { return item.second.keyword_tree.frequency_of(term) > 0; });
    if (holder == nodes.end()) break;
    const std::string name = holder->first;
    KeywordTree tree = holder->second.keyword_tree;
    tree.remove(term);
    if (tree.empty()) {
      profile.topic_graph.remove_node(name);
    } else {
      profile.topic_graph.replace_tree(name, std::move(tree));
    }
  }
  regrade_keywords(profile.keyword_db);
  return true;
}

void set_keyword_frequency(Profile& profile, const std::string& term, std::int64_t frequency) {
  if (frequency < 1) throw ValidationError("frequency must be at least 1");
  auto [it, inserted] = profile.keyword_db.try_emplace(term, KeywordEntry{term, frequency, 0.0});
  it->second.frequency = frequency;
  regrade_keywords(profile.keyword_db);
}

bool remove_topic(Profile& profile, const std::string& name) { return profile.topic_graph.remove_node(name); }

}  // namespace persona
