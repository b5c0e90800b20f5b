#include "persona/profile_model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "persona/errors.h"
#include "persona/url.h"

namespace persona {

void validate_visit(const VisitRecord& visit) {
  if (visit.url.empty()) throw ValidationError("missing url");
  if (!is_valid_url(visit.url)) throw ValidationError("invalid url");
  if (visit.visit_time <= 0) throw ValidationError("invalid visit_time");
  if (visit.duration < 0) throw ValidationError("invalid duration");
}

// ---------------------------------------------------------------------------
// KeywordTree

bool keyword_heap_less(const KeywordEntry& a, const KeywordEntry& b) {
  if (a.frequency != b.frequency) return a.frequency < b.frequency;
  return a.term > b.term;
}

KeywordTree KeywordTree::from_frequencies(const TermFrequencies& frequencies) {
  KeywordTree tree;
  tree.rebuild_from(frequencies);
  return tree;
}

KeywordTree KeywordTree::from_heap(std::vector<KeywordEntry> heap) {
  KeywordTree tree(std::move(heap));
  if (!tree.is_valid()) throw ValidationError("keyword tree is not a valid max-heap");
  return tree;
}

void KeywordTree::rebuild_from(const TermFrequencies& frequencies) {
  heap_.clear();
  heap_.reserve(frequencies.size());
  for (const auto& [term, frequency] : frequencies) {
    if (frequency <= 0) continue;
    heap_.push_back(KeywordEntry{term, frequency, 0.0});
  }
  std::make_heap(heap_.begin(), heap_.end(), keyword_heap_less);
}

const std::string& KeywordTree::root_term() const {
  if (heap_.empty()) throw ValidationError("empty keyword tree has no root");
  return heap_.front().term;
}

std::int64_t KeywordTree::frequency_of(std::string_view term) const {
  for (const auto& entry : heap_) {
    if (entry.term == term) return entry.frequency;
  }
  return 0;
}

TermFrequencies KeywordTree::frequencies() const {
  TermFrequencies out;
  for (const auto& entry : heap_) out[entry.term] = entry.frequency;
  return out;
}

void KeywordTree::merge(const KeywordTree& other) {
  TermFrequencies combined = frequencies();
  for (const auto& entry : other.heap_) combined[entry.term] += entry.frequency;
  rebuild_from(combined);
}

bool KeywordTree::remove(std::string_view term) {
  TermFrequencies combined = frequencies();
  const auto it = combined.find(std::string(term));
  if (it == combined.end()) return false;
  combined.erase(it);
  rebuild_from(combined);
  return true;
}

bool KeywordTree::is_valid() const {
  if (!std::is_heap(heap_.begin(), heap_.end(), keyword_heap_less)) return false;
  std::set<std::string_view> seen;
  for (const auto& entry : heap_) {
    if (entry.frequency <= 0 || entry.term.empty()) return false;
    if (!seen.insert(entry.term).second) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// TopicGraph

std::string_view to_string(EdgeKind kind) {
  return kind == EdgeKind::kSimilarity ? "sim" : "link";
}

EdgeKey EdgeKey::make(std::string x, std::string y, EdgeKind kind) {
  if (y < x) std::swap(x, y);
  return EdgeKey{std::move(x), std::move(y), kind};
}

bool TopicGraph::contains(std::string_view name) const { return find(name) != nullptr; }

const TopicNode* TopicGraph::find(std::string_view name) const {
  const auto it = nodes_.find(std::string(name));
  return it == nodes_.end() ? nullptr : &it->second;
}

TopicNode* TopicGraph::find_mutable(std::string_view name) {
  const auto it = nodes_.find(std::string(name));
  return it == nodes_.end() ? nullptr : &it->second;
}

TopicNode& TopicGraph::add_node(TopicNode node) {
  if (node.keyword_tree.empty()) throw ValidationError("topic needs a non-empty keyword tree");
  node.name = node.keyword_tree.root_term();
  if (nodes_.contains(node.name)) throw ValidationError("topic already exists: " + node.name);
  if (node.weight_present < 0 || node.weight_prev < 0 || node.weight_old < 0) {
    throw ValidationError("topic weights must be non-negative");
  }
  auto [it, inserted] = nodes_.emplace(node.name, std::move(node));
  return it->second;
}

bool TopicGraph::remove_node(std::string_view name) {
  const auto it = nodes_.find(std::string(name));
  if (it == nodes_.end()) return false;
  std::erase_if(edges_, [&](const auto& edge) { return edge.first.a == name || edge.first.b == name; });
  std::erase_if(page_topics_, [&](const auto& page) { return page.second == name; });
  nodes_.erase(it);
  return true;
}

void TopicGraph::rename(const std::string& from, const std::string& to) {
  auto handle = nodes_.extract(from);
  handle.key() = to;
  handle.mapped().name = to;
  nodes_.insert(std::move(handle));

  EdgeMap rekeyed;
  for (auto& [key, weight] : edges_) {
    if (key.a == from || key.b == from) {
      const std::string& other = key.a == from ? key.b : key.a;
      rekeyed.emplace(EdgeKey::make(to, other, key.kind), weight);
    } else {
      rekeyed.emplace(key, weight);
    }
  }
  edges_ = std::move(rekeyed);
  for (auto& [url, topic] : page_topics_) {
    if (topic == from) topic = to;
  }
}

void TopicGraph::fold_into(const std::string& from, const std::string& into) {
  TopicNode source = std::move(nodes_.at(from));
  nodes_.erase(from);
  TopicNode& target = nodes_.at(into);
  target.keyword_tree.merge(source.keyword_tree);
  target.weight_present += source.weight_present;
  target.weight_prev += source.weight_prev;
  target.weight_old += source.weight_old;

  EdgeMap kept;
  std::vector<std::pair<EdgeKey, double>> moved;
  for (auto& [key, weight] : edges_) {
    if (key.a != from && key.b != from) {
      kept.emplace(key, weight);
      continue;
    }
    const std::string& other = key.a == from ? key.b : key.a;
    if (other == into) continue;  // would become a self-loop
    moved.emplace_back(EdgeKey::make(into, other, key.kind), weight);
  }
  for (auto& [key, weight] : moved) {
    auto [it, inserted] = kept.emplace(key, weight);
    if (inserted) continue;
    // Similarity edges stay in [0,1]; hyperlink counts accumulate.
    it->second = key.kind == EdgeKind::kSimilarity ? std::max(it->second, weight) : it->second + weight;
  }
  edges_ = std::move(kept);
  for (auto& [url, topic] : page_topics_) {
    if (topic == from) topic = into;
  }
}

std::string TopicGraph::replace_tree(const std::string& name, KeywordTree tree) {
  if (tree.empty()) throw ValidationError("topic needs a non-empty keyword tree");
  TopicNode* node = find_mutable(name);
  if (node == nullptr) throw ValidationError("unknown topic: " + name);
  node->keyword_tree = std::move(tree);

  std::string current = name;
  for (;;) {
    const std::string root = nodes_.at(current).keyword_tree.root_term();
    if (root == current) return current;
    if (nodes_.contains(root)) {
      fold_into(current, root);
    } else {
      rename(current, root);
    }
    current = root;
  }
}

double TopicGraph::edge_weight(std::string_view a, std::string_view b, EdgeKind kind) const {
  const auto it = edges_.find(EdgeKey::make(std::string(a), std::string(b), kind));
  return it == edges_.end() ? 0.0 : it->second;
}

void TopicGraph::set_edge(const std::string& a, const std::string& b, EdgeKind kind, double weight) {
  if (a == b) throw ValidationError("self-loop on topic " + a);
  if (!nodes_.contains(a) || !nodes_.contains(b)) throw ValidationError("edge endpoint is not a topic");
  if (!(weight >= 0.0)) throw ValidationError("edge weight must be non-negative");
  edges_[EdgeKey::make(a, b, kind)] = weight;
}

void TopicGraph::add_edge_weight(const std::string& a, const std::string& b, EdgeKind kind, double delta) {
  set_edge(a, b, kind, edge_weight(a, b, kind) + delta);
}

bool TopicGraph::remove_edge(const EdgeKey& key) { return edges_.erase(key) > 0; }

std::vector<std::tuple<std::string, double, EdgeKind>> TopicGraph::incident(std::string_view name) const {
  std::vector<std::tuple<std::string, double, EdgeKind>> out;
  for (const auto& [key, weight] : edges_) {
    if (key.a == name) {
      out.emplace_back(key.b, weight, key.kind);
    } else if (key.b == name) {
      out.emplace_back(key.a, weight, key.kind);
    }
  }
  return out;
}

double TopicGraph::max_edge_weight() const {
  double best = 0.0;
  for (const auto& [key, weight] : edges_) best = std::max(best, weight);
  return best;
}

void TopicGraph::map_page(const std::string& url, const std::string& topic) {
  if (!nodes_.contains(topic)) throw ValidationError("unknown topic: " + topic);
  page_topics_[url] = topic;
}

const std::string* TopicGraph::topic_of_page(const std::string& url) const {
  const auto it = page_topics_.find(url);
  return it == page_topics_.end() ? nullptr : &it->second;
}

void TopicGraph::scale_edges(double factor) {
  for (auto& [key, weight] : edges_) weight *= factor;
}

void TopicGraph::prune() {
  const double threshold = edge_prune_threshold_;
  std::erase_if(edges_, [&](const auto& edge) { return edge.second < threshold; });
  std::vector<std::string> doomed;
  for (const auto& [name, node] : nodes_) {
    if (node.total_weight() < threshold) doomed.push_back(name);
  }
  for (const auto& name : doomed) remove_node(name);
}

std::vector<std::string> TopicGraph::invariant_violations() const {
  std::vector<std::string> problems;
  for (const auto& [name, node] : nodes_) {
    if (node.name != name) problems.push_back("node key/name mismatch: " + name);
    if (node.keyword_tree.empty()) {
      problems.push_back("empty keyword tree: " + name);
    } else if (node.keyword_tree.root_term() != name) {
      problems.push_back("topic name is not the tree root: " + name);
    }
    if (!node.keyword_tree.is_valid()) problems.push_back("heap property broken: " + name);
    if (node.weight_present < 0 || node.weight_prev < 0 || node.weight_old < 0) {
      problems.push_back("negative weight: " + name);
    }
  }
  for (const auto& [key, weight] : edges_) {
    if (key.a == key.b) problems.push_back("self-loop: " + key.a);
    if (!(key.a < key.b)) problems.push_back("edge endpoints out of order: " + key.a + "/" + key.b);
    if (!nodes_.contains(key.a) || !nodes_.contains(key.b)) {
      problems.push_back("dangling edge: " + key.a + "/" + key.b);
    }
    if (!(weight >= 0)) problems.push_back("negative edge weight: " + key.a + "/" + key.b);
  }
  for (const auto& [url, topic] : page_topics_) {
    if (!nodes_.contains(topic)) problems.push_back("page mapped to missing topic: " + url);
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Config types

void WobConfig::validate() const {
  if (size_limit_bytes == 0 || event_limit == 0) throw ValidationError("wob limits must be positive");
  if (!(freshness_factor > 0.0 && freshness_factor <= 1.0)) {
    throw ValidationError("freshness_factor must be in (0, 1]");
  }
}

GradeCoefficients::GradeCoefficients() { values_.fill(1.0 / 6.0); }

GradeCoefficients::GradeCoefficients(double a, double b, double c, double d, double e, double f)
    : values_{a, b, c, d, e, f} {
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("coefficients must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) throw ValidationError("coefficients must sum to 1");
}

// ---------------------------------------------------------------------------
// Window of observation

std::vector<VisitRecord> current_wob_visits(const Profile& profile) {
  std::vector<VisitRecord> visits;
  visits.reserve(profile.visits.present.size() + profile.visits.prev.size());
  visits.insert(visits.end(), profile.visits.prev.begin(), profile.visits.prev.end());
  visits.insert(visits.end(), profile.visits.present.begin(), profile.visits.present.end());
  return visits;
}

std::uint64_t present_band_bytes(const Profile& profile) {
  // Row overhead approximates the fixed-width columns of a visits table.
  constexpr std::uint64_t kRowOverhead = 40;
  std::uint64_t bytes = 0;
  for (const auto& visit : profile.visits.present) {
    bytes += visit.url.size() + visit.title.size() + kRowOverhead;
  }
  return bytes;
}

bool rotation_due(const Profile& profile) {
  if (profile.visits.present.empty()) return false;
  return profile.visits.present.size() >= profile.wob_config.event_limit ||
         present_band_bytes(profile) >= profile.wob_config.size_limit_bytes;
}

Profile rotate_wob(Profile profile) {
  const double freshness = profile.wob_config.freshness_factor;
  profile.topic_graph.for_each_node([freshness](TopicNode& node) {
    const double old_weight = freshness * (node.weight_old + node.weight_prev);
    node.weight_prev = node.weight_present;
    node.weight_present = 0.0;
    node.weight_old = old_weight;
  });
  profile.topic_graph.scale_edges(freshness);
  profile.topic_graph.prune();

  auto& bands = profile.visits;
  bands.old.insert(bands.old.end(), std::make_move_iterator(bands.prev.begin()),
                   std::make_move_iterator(bands.prev.end()));
  bands.prev = std::move(bands.present);
  bands.present.clear();
  return profile;
}

std::vector<std::string> profile_invariant_violations(const Profile& profile) {
  std::vector<std::string> problems = profile.topic_graph.invariant_violations();

  const auto check_db = [&](const KeywordDb& db, const std::string& label) {
    for (const auto& [term, entry] : db) {
      if (entry.term != term) problems.push_back(label + " key/term mismatch: " + term);
      if (entry.frequency < 1) problems.push_back(label + " frequency below 1: " + term);
      if (!(entry.percentile_grade >= 0 && entry.percentile_grade <= 100)) {
        problems.push_back(label + " percentile out of range: " + term);
      }
    }
  };
  check_db(profile.keyword_db, "keyword_db");
  check_db(profile.offline_profile, "offline_profile");

  for (const auto& [name, node] : profile.topic_graph.nodes()) {
    for (const auto& entry : node.keyword_tree.entries()) {
      if (!profile.keyword_db.contains(entry.term)) {
        problems.push_back("topic keyword missing from keyword_db: " + entry.term);
      }
    }
  }

  for (const auto& [url, grade] : profile.url_grades) {
    const double expected = (grade.frequency_pct + grade.duration_pct + grade.typed) * grade.freshness_value;
    if (grade.url != url) problems.push_back("url grade key mismatch: " + url);
    if (grade.total != expected || grade.total < 0 || grade.total > 3) {
      problems.push_back("url grade total inconsistent: " + url);
    }
  }

  for (const auto& query : profile.search_patterns) {
    if (query.frequency < 1 || query.terms.empty() ||
        !(query.percentile_grade >= 0 && query.percentile_grade <= 100)) {
      problems.push_back("malformed search pattern: " + query.raw_query);
    }
  }

  for (const auto* band : {&profile.visits.present, &profile.visits.prev, &profile.visits.old}) {
    for (const auto& visit : *band) {
      try {
        validate_visit(visit);
      } catch (const ValidationError& e) {
        problems.push_back("invalid visit " + visit.url + ": " + e.what());
      }
    }
  }
  return problems;
}

}  // namespace persona
