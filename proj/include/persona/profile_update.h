#pragma once

// Applies observed activity to a profile: visits, documents, curation edits
// and WOB rotation, keeping derived grades in step.

#include <span>
#include <string>
#include <vector>

#include "persona/grading.h"
#include "persona/ingest.h"
#include "persona/profile_model.h"
#include "persona/text.h"
#include "persona/topic_engine.h"

namespace persona {

struct EngineConfig {
  TokenizerConfig tokenizer;
  double keyword_epsilon = kDefaultKeywordEpsilon;
  AssimilationConfig assimilation;
  std::vector<SearchEngineRule> search_engines = default_search_engines();
};

// Recomputes url_grades and search_patterns from Present + Prev.
void regrade_current_wob(Profile& profile, const EngineConfig& config);

// Keyword counts for a visited page when only its title and URL are known:
// title terms weighted like an HTML title, plus URL path terms.
TermFrequencies visit_page_keywords(const VisitRecord& visit, const TokenizerConfig& tokenizer);

// Grades the page's keywords into keyword_db and assimilates a digest built
// from the selected keywords into the topic graph. Returns the touched topic,
// or an empty string when no keyword cleared the epsilon cut.
std::string observe_page(Profile& profile, const std::string& url, const TermFrequencies& page_keywords,
                         std::span<const std::string> out_links, const EngineConfig& config);

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rotations = 0;
};

// Appends valid visits to the Present band (rotating whenever the trigger
// fires), grades them and feeds each page through observe_page.
IngestReport ingest_visits(Profile& profile, std::span<const VisitRecord> visits, const EngineConfig& config);

// Adds document keyword counts to the offline profile and regrades it.
void ingest_documents(Profile& profile, std::span<const DocumentRecord> documents, const EngineConfig& config);

Profile rotate_and_regrade(Profile profile, const EngineConfig& config);

// Removes the term from keyword_db and from every topic tree; topics left
// without keywords disappear. False if the term is unknown.
bool remove_keyword(Profile& profile, const std::string& term);
// Manual priority override. Throws ValidationError for frequency < 1.
void set_keyword_frequency(Profile& profile, const std::string& term, std::int64_t frequency);
bool remove_topic(Profile& profile, const std::string& name);

}  // namespace persona
