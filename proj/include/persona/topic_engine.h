#pragma once

// Topic clustering over keyword trees: assimilation of pages into the topic
// graph, weight propagation, pruning, connected components and topic value.

#include <string>
#include <vector>

#include "persona/profile_model.h"

namespace persona {

struct PageDigest {
  std::string url;
  KeywordTree keyword_tree;
  std::vector<std::string> out_links;
  double frequency_pct = 0.0;  // from the page's UrlGrade, in [0,1]
  double duration_pct = 0.0;
};

struct AssimilationConfig {
  // A page whose root is not a topic merges into the most similar topic at or above this.
  double sim_threshold = 0.5;
  // Similarity edges are kept from this value up.
  double similarity_edge_threshold = 0.2;
};

struct AssimilationOutcome {
  std::string topic;        // final name of the touched topic
  bool created = false;
  double sim_factor = 0.0;  // 1 for an exact name match
  double delta = 0.0;       // weight added to the topic (0 when created)
};

// Throws ValidationError on an empty map.
KeywordTree build_keyword_tree(const TermFrequencies& frequencies);

// Cosine similarity of two frequency vectors over the union of their terms.
// Exactly symmetric; 1 for identical inputs, 0 when either is empty or they are disjoint.
double cosine_similarity(const TermFrequencies& a, const TermFrequencies& b);
double tree_similarity(const KeywordTree& a, const KeywordTree& b);

TopicGraph assimilate_page(TopicGraph graph, const PageDigest& page, const AssimilationConfig& config = {},
                           AssimilationOutcome* outcome = nullptr);

// Removes edges under the graph's prune threshold, then nodes whose summed
// weight is under it (with their edges). Weight decay itself happens in rotate_wob.
TopicGraph decay_and_prune(TopicGraph graph);

// Connected components over both edge kinds. Names inside a cluster are
// sorted; clusters are ordered by their first name.
std::vector<std::vector<std::string>> clusters(const TopicGraph& graph);

inline constexpr double kCurrentWobShare = 0.75;
inline constexpr double kOldWobShare = 0.25;

// 0.75 * (present + prev) + 0.25 * old
double topic_value(const TopicNode& topic);

struct TopicRanking {
  std::string name;
  double value = 0.0;
  std::size_t cluster = 0;  // index into clusters(graph)
};

// Descending by value, ties by name.
std::vector<TopicRanking> rank_topics(const TopicGraph& graph);

// One "a<TAB>b<TAB>weight<TAB>kind" line per edge.
std::string export_edge_list(const TopicGraph& graph);

}  // namespace persona
