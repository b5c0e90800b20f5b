#pragma once

// Domain types of the user profile and the window-of-observation lifecycle.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace persona {

using Timestamp = std::int64_t;  // Unix seconds, UTC
using TermFrequencies = std::map<std::string, std::int64_t>;

enum class Transition { kTyped, kClicked };

struct VisitRecord {
  std::string url;
  std::string title;
  Timestamp visit_time = 0;
  std::int64_t duration = 0;  // seconds
  Transition transition = Transition::kClicked;
  Timestamp last_modified_time = 0;

  friend bool operator==(const VisitRecord&, const VisitRecord&) = default;
};

// Throws ValidationError when a record breaks its invariants.
void validate_visit(const VisitRecord& visit);

struct SearchQueryRecord {
  std::string raw_query;
  std::vector<std::string> terms;
  Timestamp issued_at = 0;
  std::int64_t frequency = 1;
  double percentile_grade = 0.0;

  friend bool operator==(const SearchQueryRecord&, const SearchQueryRecord&) = default;
};

struct KeywordEntry {
  std::string term;
  std::int64_t frequency = 1;
  double percentile_grade = 0.0;

  friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

using KeywordDb = std::map<std::string, KeywordEntry>;

// Max-heap of keywords by frequency. Equal frequencies order the
// lexicographically smaller term first, so the root is deterministic.
class KeywordTree {
 public:
  KeywordTree() = default;

  static KeywordTree from_frequencies(const TermFrequencies& frequencies);
  // Adopts an existing heap layout; throws ValidationError if it is not a
  // valid heap or contains duplicate or non-positive entries.
  static KeywordTree from_heap(std::vector<KeywordEntry> heap);

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const std::string& root_term() const;
  std::span<const KeywordEntry> entries() const { return heap_; }

  std::int64_t frequency_of(std::string_view term) const;
  TermFrequencies frequencies() const;

  // Sums per-term frequencies and restores the heap.
  void merge(const KeywordTree& other);
  bool remove(std::string_view term);

  // Full scan: heap order holds and no term repeats.
  bool is_valid() const;

  friend bool operator==(const KeywordTree&, const KeywordTree&) = default;

 private:
  explicit KeywordTree(std::vector<KeywordEntry> heap) : heap_(std::move(heap)) {}
  void rebuild_from(const TermFrequencies& frequencies);

  std::vector<KeywordEntry> heap_;
};

// Strict weak order used for the heap: a sorts below b.
bool keyword_heap_less(const KeywordEntry& a, const KeywordEntry& b);

struct TopicNode {
  std::string name;
  KeywordTree keyword_tree;
  double weight_present = 0.0;
  double weight_prev = 0.0;
  double weight_old = 0.0;

  double total_weight() const { return weight_present + weight_prev + weight_old; }

  friend bool operator==(const TopicNode&, const TopicNode&) = default;
};

enum class EdgeKind { kSimilarity, kHyperlink };

std::string_view to_string(EdgeKind kind);

// Undirected edge identity; a < b always holds.
struct EdgeKey {
  std::string a;
  std::string b;
  EdgeKind kind = EdgeKind::kSimilarity;

  static EdgeKey make(std::string x, std::string y, EdgeKind kind);

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

inline constexpr double kDefaultEdgePruneThreshold = 0.05;

class TopicGraph {
 public:
  using NodeMap = std::map<std::string, TopicNode>;
  using EdgeMap = std::map<EdgeKey, double>;

  TopicGraph() = default;
  explicit TopicGraph(double edge_prune_threshold) : edge_prune_threshold_(edge_prune_threshold) {}

  double edge_prune_threshold() const { return edge_prune_threshold_; }
  void set_edge_prune_threshold(double threshold) { edge_prune_threshold_ = threshold; }

  const NodeMap& nodes() const { return nodes_; }
  const EdgeMap& edges() const { return edges_; }
  // Page URL -> topic it was assimilated into; resolves hyperlinks to topics.
  const std::map<std::string, std::string>& page_topics() const { return page_topics_; }

  bool contains(std::string_view name) const;
  const TopicNode* find(std::string_view name) const;
  // Weights may be edited freely; do not touch keyword_tree through this, use
  // replace_tree so the node name follows the tree root.
  TopicNode* find_mutable(std::string_view name);

  // Inserts a node named after its tree root. Throws if the name exists or the tree is empty.
  TopicNode& add_node(TopicNode node);
  bool remove_node(std::string_view name);

  // Installs a new tree for the node. If the root changes the node is renamed;
  // when the new name belongs to another topic the two are folded together
  // (trees and weights summed, edges re-pointed). Returns the final name.
  std::string replace_tree(const std::string& name, KeywordTree tree);

  double edge_weight(std::string_view a, std::string_view b, EdgeKind kind) const;
  // Throws ValidationError on self-loops, unknown endpoints or negative weight.
  void set_edge(const std::string& a, const std::string& b, EdgeKind kind, double weight);
  void add_edge_weight(const std::string& a, const std::string& b, EdgeKind kind, double delta);
  bool remove_edge(const EdgeKey& key);

  // (neighbor, edge weight, kind) for every edge incident to name.
  std::vector<std::tuple<std::string, double, EdgeKind>> incident(std::string_view name) const;
  double max_edge_weight() const;

  void map_page(const std::string& url, const std::string& topic);
  const std::string* topic_of_page(const std::string& url) const;

  // Multiplies every edge weight by factor.
  void scale_edges(double factor);
  // Drops edges under the threshold, then nodes whose summed weight is under it.
  void prune();

  // Empty when the graph is consistent; otherwise one message per violation.
  std::vector<std::string> invariant_violations() const;

  // Weight-only mutation of every node. fn must not touch keyword_tree or name.
  template <typename Fn>
  void for_each_node(Fn&& fn) {
    for (auto& [name, node] : nodes_) fn(node);
  }

  friend bool operator==(const TopicGraph&, const TopicGraph&) = default;

 private:
  void fold_into(const std::string& from, const std::string& into);
  void rename(const std::string& from, const std::string& to);

  NodeMap nodes_;
  EdgeMap edges_;
  std::map<std::string, std::string> page_topics_;
  double edge_prune_threshold_ = kDefaultEdgePruneThreshold;
};

struct UrlGrade {
  std::string url;
  double frequency_pct = 0.0;
  double duration_pct = 0.0;
  int typed = 0;
  double freshness_value = 0.0;
  double total = 0.0;

  friend bool operator==(const UrlGrade&, const UrlGrade&) = default;
};

struct WobConfig {
  std::uint64_t size_limit_bytes = 100ull * 1024 * 1024;
  std::uint64_t event_limit = 10000;
  double freshness_factor = 0.9;

  void validate() const;

  friend bool operator==(const WobConfig&, const WobConfig&) = default;
};

// Blend weights a..f for the six re-ranking signals. Always sums to 1.
class GradeCoefficients {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Equal weights of 1/6.
  GradeCoefficients();
  GradeCoefficients(double a, double b, double c, double d, double e, double f);

  double a() const { return values_[0]; }
  double b() const { return values_[1]; }
  double c() const { return values_[2]; }
  double d() const { return values_[3]; }
  double e() const { return values_[4]; }
  double f() const { return values_[5]; }
  const std::array<double, 6>& values() const { return values_; }

  friend bool operator==(const GradeCoefficients&, const GradeCoefficients&) = default;

 private:
  std::array<double, 6> values_;
};

struct VisitBands {
  std::vector<VisitRecord> present;
  std::vector<VisitRecord> prev;
  std::vector<VisitRecord> old;

  friend bool operator==(const VisitBands&, const VisitBands&) = default;
};

struct Profile {
  WobConfig wob_config;
  VisitBands visits;
  KeywordDb keyword_db;
  TopicGraph topic_graph;
  std::map<std::string, UrlGrade> url_grades;
  std::vector<SearchQueryRecord> search_patterns;
  KeywordDb offline_profile;
  GradeCoefficients coefficients;

  friend bool operator==(const Profile&, const Profile&) = default;
};

// Present + Prev, the bands grading works on.
std::vector<VisitRecord> current_wob_visits(const Profile& profile);

// Rough storage footprint of the Present band, compared against size_limit_bytes.
std::uint64_t present_band_bytes(const Profile& profile);
bool rotation_due(const Profile& profile);

// Retires the Present band: old <- freshness * (old + prev), prev <- present,
// present <- 0, for topic weights and (by shifting) for visit bands. Edge
// weights decay by the same factor and the graph is pruned afterwards.
Profile rotate_wob(Profile profile);

// Structural checks across the whole profile, used by tests and the loader.
std::vector<std::string> profile_invariant_violations(const Profile& profile);

}  // namespace persona
