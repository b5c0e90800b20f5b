#include "persona/topic_engine.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "persona/errors.h"

namespace persona {

KeywordTree build_keyword_tree(const TermFrequencies& frequencies) {
  if (frequencies.empty()) throw ValidationError("cannot build a keyword tree from no keywords");
  return KeywordTree::from_frequencies(frequencies);
}

double cosine_similarity(const TermFrequencies& a, const TermFrequencies& b) {
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (const auto& [term, f] : a) norm_a += static_cast<double>(f) * static_cast<double>(f);
  for (const auto& [term, f] : b) norm_b += static_cast<double>(f) * static_cast<double>(f);
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;

  // Merge walk in term order, so the summation order is the same for (a,b) and (b,a).
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * static_cast<double>(ib->second);
      ++ia;
      ++ib;
    }
  }
  // |a - b|^2 = 0 exactly.
  if (dot == norm_a && dot == norm_b) return 1.0;
  return std::clamp(dot / std::sqrt(norm_a * norm_b), 0.0, 1.0);
}

double tree_similarity(const KeywordTree& a, const KeywordTree& b) {
  return cosine_similarity(a.frequencies(), b.frequencies());
}

TopicGraph assimilate_page(TopicGraph graph, const PageDigest& page, const AssimilationConfig& config,
                           AssimilationOutcome* outcome) {
  if (page.keyword_tree.empty()) throw ValidationError("page has no keywords to assimilate");

  AssimilationOutcome result;
  const std::string& root = page.keyword_tree.root_term();

  if (const TopicNode* same = graph.find(root)) {
    KeywordTree merged = same->keyword_tree;
    merged.merge(page.keyword_tree);
    result.topic = graph.replace_tree(root, std::move(merged));
    result.sim_factor = 1.0;
  } else {
    std::string best;
    double best_similarity = -1.0;
    for (const auto& [name, node] : graph.nodes()) {
      const double s = tree_similarity(node.keyword_tree, page.keyword_tree);
      if (s > best_similarity) {
        best_similarity = s;
        best = name;
      }
    }
    if (!best.empty() && best_similarity >= config.sim_threshold) {
      KeywordTree merged = graph.find(best)->keyword_tree;
      merged.merge(page.keyword_tree);
      result.topic = graph.replace_tree(best, std::move(merged));
      result.sim_factor = best_similarity;
    } else {
      TopicNode node;
      node.keyword_tree = page.keyword_tree;
      node.weight_present = 1.0;
      result.topic = graph.add_node(std::move(node)).name;
      result.created = true;
    }
  }
  const std::string& topic = result.topic;
  graph.map_page(page.url, topic);

  for (const auto& link : page.out_links) {
    const std::string* linked = graph.topic_of_page(link);
    if (linked != nullptr && *linked != topic) {
      const std::string other = *linked;
      graph.add_edge_weight(topic, other, EdgeKind::kHyperlink, 1.0);
    }
  }

  const TermFrequencies topic_terms = graph.find(topic)->keyword_tree.frequencies();
  std::vector<std::pair<std::string, double>> similar;
  for (const auto& [name, node] : graph.nodes()) {
    if (name == topic) continue;
    const double s = cosine_similarity(topic_terms, node.keyword_tree.frequencies());
    if (s >= config.similarity_edge_threshold) similar.emplace_back(name, s);
  }
  for (const auto& [name, s] : similar) {
    const double current = graph.edge_weight(topic, name, EdgeKind::kSimilarity);
    graph.set_edge(topic, name, EdgeKind::kSimilarity, std::max(current, s));
  }

  if (!result.created) {
    result.delta = (page.frequency_pct + page.duration_pct) * result.sim_factor;
    graph.find_mutable(topic)->weight_present += result.delta;

    const double max_weight = std::max(1.0, graph.max_edge_weight());
    for (const auto& [neighbor, weight, kind] : graph.incident(topic)) {
      graph.find_mutable(neighbor)->weight_present += result.delta * weight / max_weight;
    }
  }

  if (outcome != nullptr) *outcome = std::move(result);
  return graph;
}

TopicGraph decay_and_prune(TopicGraph graph) {
  graph.prune();
  return graph;
}

std::vector<std::vector<std::string>> clusters(const TopicGraph& graph) {
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const auto& [name, node] : graph.nodes()) adjacency[name];
  for (const auto& [key, weight] : graph.edges()) {
    adjacency[key.a].push_back(key.b);
    adjacency[key.b].push_back(key.a);
  }

  std::set<std::string> visited;
  std::vector<std::vector<std::string>> components;
  for (const auto& [start, neighbors] : adjacency) {
    if (visited.contains(start)) continue;
    std::vector<std::string> component;
    std::deque<std::string> frontier{start};
    visited.insert(start);
    while (!frontier.empty()) {
      std::string current = std::move(frontier.front());
      frontier.pop_front();
      for (const auto& next : adjacency[current]) {
        if (visited.insert(next).second) frontier.push_back(next);
      }
      component.push_back(std::move(current));
    }
    std::sort(component.begin(), component.end());
    components.push_back(std::move(component));
  }
  // Starts are visited in name order and each start is its component's minimum.
  return components;
}

double topic_value(const TopicNode& topic) {
  return kCurrentWobShare * (topic.weight_present + topic.weight_prev) + kOldWobShare * topic.weight_old;
}

std::vector<TopicRanking> rank_topics(const TopicGraph& graph) {
  std::map<std::string, std::size_t> cluster_of;
  const auto components = clusters(graph);
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (const auto& name : components[i]) cluster_of[name] = i;
  }
  std::vector<TopicRanking> ranking;
  for (const auto& [name, node] : graph.nodes()) ranking.push_back({name, topic_value(node), cluster_of[name]});
  std::sort(ranking.begin(), ranking.end(), [](const TopicRanking& x, const TopicRanking& y) {
    if (x.value != y.value) return x.value > y.value;
    return x.name < y.name;
  });
  return ranking;
}

std::string export_edge_list(const TopicGraph& graph) {
  std::string out;
  for (const auto& [key, weight] : graph.edges()) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), weight);
    out += key.a;
    out += '\t';
    out += key.b;
    out += '\t';
    out.append(buffer, end);
    out += '\t';
    out += to_string(key.kind);
    out += '\n';
  }
  return out;
}

}  // namespace persona
