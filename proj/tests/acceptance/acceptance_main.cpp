// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "grade_oracle.h"
#include "persona/grading.h"
#include "persona/ingest.h"
#include "persona/profile_update.h"
#include "persona/reranker.h"
#include "persona/service.h"
#include "persona/topic_engine.h"
#include "test_support.h"

namespace persona {
namespace {

using Clock = std::chrono::steady_clock;
using Failure = std::optional<std::string>;
using testing::Rng;

std::string fmt(const char* pattern, auto... args) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), pattern, args...);
  return buffer;
}

// ---------------------------------------------------------------------------

Failure formula_fidelity() {
  Rng rng(1001);
  for (int fixture = 0; fixture < 50; ++fixture) {
    const Profile profile = testing::random_profile(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 20)));
    const auto bank = testing::random_bank(rng, profile, static_cast<std::size_t>(testing::uniform_int(rng, 1, 100)));
    const RerankContext context(profile, testing::bare_tokenizer());
    for (const auto& result : bank.results) {
      const auto got = grade_result(result, context, bank.results.size());
      const auto want = testing::oracle_grade(result, profile, bank.results.size());
      const double diffs[] = {got.u_g - want.u_g, got.k_w - want.k_w, got.t_v - want.t_v, got.o_v - want.o_v,
                              got.w_r - want.w_r, got.s_g - want.s_g, got.grade - want.grade};
      for (double d : diffs) {
        if (std::abs(d) > 1e-9) {
          return fmt("fixture %d, %s: off by %.3g", fixture, result.url.c_str(), d);
        }
      }
    }
  }
  return std::nullopt;
}

// Sort a copy, then average the 1-based positions holding the value.
std::vector<double> sorted_average_rank(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(values.size());
  std::vector<double> out;
  for (double v : values) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const double mean_rank = static_cast<double>((lo + 1) + hi) / 2.0;
    out.push_back(100.0 * mean_rank / n);
  }
  return out;
}

Failure percentile_oracle() {
  Rng rng(1002);
  for (int draw = 0; draw < 1000; ++draw) {
    const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 20));
    const auto spread = testing::uniform_int(rng, 0, 30);
    std::vector<std::pair<std::string, double>> population;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = static_cast<double>(testing::uniform_int(rng, 0, spread)) * 0.5;
      population.emplace_back("id" + std::to_string(i), v);
      values.push_back(v);
    }
    const auto table = percentile_rank(population);
    const auto expected = sorted_average_rank(values);
    for (std::size_t i = 0; i < n; ++i) {
      if (table.entries()[i].percentile != expected[i]) {
        return fmt("draw %d item %zu: %.17g vs %.17g", draw, i, table.entries()[i].percentile, expected[i]);
      }
    }
  }
  return std::nullopt;
}

Failure url_grade_property() {
  Rng rng(1003);
  for (int round = 0; round < 1000; ++round) {
    std::vector<VisitRecord> visits;
    const auto urls = testing::uniform_int(rng, 1, 15);
    const auto count = testing::uniform_int(rng, 1, 50);
    for (std::int64_t i = 0; i < count; ++i) {
      const Timestamp t = testing::uniform_int(rng, 1, 100000);
      visits.push_back({"https://u" + std::to_string(testing::uniform_int(rng, 0, urls - 1)) + ".example/", "", t,
                        testing::uniform_int(rng, 0, 600),
                        testing::uniform_int(rng, 0, 2) == 0 ? Transition::kTyped : Transition::kClicked, t});
    }
    const auto before = grade_urls(visits);
    for (const auto& [url, g] : before) {
      if (!(g.total >= 0.0 && g.total <= 3.0)) return fmt("round %d: total %.17g out of range", round, g.total);
    }
    const std::string target = visits[static_cast<std::size_t>(testing::uniform_int(rng, 0, count - 1))].url;
    const Timestamp t = testing::uniform_int(rng, 1, 200000);
    visits.push_back({target, "", t, testing::uniform_int(rng, 0, 600), Transition::kClicked, t});
    const auto after = grade_urls(visits);
    if (after.at(target).frequency_pct < before.at(target).frequency_pct) {
      return fmt("round %d: frequency percentile fell", round);
    }
    for (const auto& [url, g] : after) {
      if (!(g.total >= 0.0 && g.total <= 3.0)) return fmt("round %d: total %.17g out of range", round, g.total);
    }
  }
  return std::nullopt;
}

Failure wob_decay_exactness() {
  Rng rng(1004);
  for (int round = 0; round < 10; ++round) {
    const Profile before = testing::random_profile(rng, 100);
    const Profile after = rotate_wob(before);
    if (after.topic_graph.nodes().size() != 100) return fmt("round %d: topics lost in rotation", round);
    for (const auto& [name, old_node] : before.topic_graph.nodes()) {
      const TopicNode& node = *after.topic_graph.find(name);
      const double expected_old = 0.9 * (old_node.weight_old + old_node.weight_prev);
      if (node.weight_old != expected_old) {
        return fmt("round %d %s: weight_old %.17g vs %.17g", round, name.c_str(), node.weight_old, expected_old);
      }
      if (node.weight_prev != old_node.weight_present || node.weight_present != 0.0) {
        return fmt("round %d %s: bands not shifted", round, name.c_str());
      }
      for (const TopicNode* n : {&old_node, &node}) {
        const double alpha = n->weight_present + n->weight_prev;
        if (topic_value(*n) != 0.75 * alpha + 0.25 * n->weight_old) {
          return fmt("round %d %s: topic_value mismatch", round, name.c_str());
        }
      }
    }
  }
  return std::nullopt;
}

Failure cluster_oracle() {
  Rng rng(1005);
  for (int round = 0; round < 200; ++round) {
    const auto names = testing::distinct_words(rng, static_cast<std::size_t>(testing::uniform_int(rng, 1, 50)));
    TopicGraph graph;
    std::vector<std::size_t> parent(names.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (const auto& name : names) {
      TopicNode node;
      node.keyword_tree = KeywordTree::from_frequencies({{name, 1}});
      node.weight_present = 1.0;
      graph.add_node(std::move(node));
    }
    const auto edges = testing::uniform_int(rng, 0, static_cast<std::int64_t>(names.size()) * 3 / 2);
    for (std::int64_t e = 0; e < edges; ++e) {
      const auto x = static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<std::int64_t>(names.size()) - 1));
      const auto y = static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<std::int64_t>(names.size()) - 1));
      if (x == y) continue;
      graph.set_edge(names[x], names[y], e % 2 ? EdgeKind::kHyperlink : EdgeKind::kSimilarity, 0.5);
      parent[find(x)] = find(y);
    }
    std::map<std::size_t, std::set<std::string>> groups;
    for (std::size_t i = 0; i < names.size(); ++i) groups[find(i)].insert(names[i]);
    std::set<std::set<std::string>> expected;
    for (auto& [root, members] : groups) expected.insert(members);
    std::set<std::set<std::string>> got;
    std::size_t total = 0;
    for (const auto& c : clusters(graph)) {
      got.emplace(c.begin(), c.end());
      total += c.size();
    }
    if (got != expected || total != names.size()) return fmt("graph %d: components differ", round);
  }
  return std::nullopt;
}

Failure membership_and_neutrality() {
  Rng rng(1006);
  const Profile empty;
  for (int round = 0; round < 200; ++round) {
    const Profile profile = testing::random_profile(rng, static_cast<std::size_t>(testing::uniform_int(rng, 0, 15)));
    const auto bank = testing::random_bank(rng, profile, static_cast<std::size_t>(testing::uniform_int(rng, 1, 100)));
    std::set<std::string> bank_urls;
    for (const auto& r : bank.results) bank_urls.insert(r.url);

    std::set<std::string> seen;
    for (const auto& [result, grade] : rerank(bank, RerankContext(profile, testing::bare_tokenizer()),
                                              testing::uniform(rng, 0.0, 0.2))) {
      if (!bank_urls.contains(result.url) || !seen.insert(result.url).second) {
        return fmt("round %d: %s not from the bank or repeated", round, result.url.c_str());
      }
    }

    const auto neutral = rerank(bank, empty);
    if (neutral.size() != bank.results.size()) return fmt("round %d: empty profile dropped results", round);
    for (std::size_t i = 0; i < neutral.size(); ++i) {
      if (!(neutral[i].first == bank.results[i])) return fmt("round %d: empty profile reordered position %zu", round, i + 1);
    }
  }
  return std::nullopt;
}

std::vector<VisitRecord> load_history(const std::string& name) {
  const auto parsed = parse_history_text(testing::read_file(testing::data_dir() / name));
  if (!parsed.rejects.empty()) throw std::runtime_error(name + " has rejected rows");
  return parsed.records;
}

Failure linux_journal_scenario() {
  const auto start = Clock::now();
  Profile profile;
  const EngineConfig config;
  const auto history = load_history("linux_history.jsonl");
  if (history.size() != 20) return fmt("expected 20 pages, got %zu", history.size());
  ingest_visits(profile, history, config);

  auto provider = FixtureProvider::from_file(testing::data_dir() / "journal_bank.json");
  const SearchBank bank = fetch_results("journal", provider);
  const auto lj = std::find_if(bank.results.begin(), bank.results.end(),
                               [](const SearchResult& r) { return r.url == "https://www.linuxjournal.com/"; });
  if (lj == bank.results.end() || lj->web_rank != 13) return std::string("Linux Journal is not at web rank 13");

  const auto ranked = rerank(bank, RerankContext(profile, config.tokenizer));
  std::size_t position = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].first.url == lj->url) position = i + 1;
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (position == 0 || position > 3) return fmt("Linux Journal re-ranked to %zu", position);
  if (seconds >= 1.0) return fmt("took %.3f s", seconds);
  return std::nullopt;
}

Failure feedback_loop() {
  using nlohmann::json;
  const auto start = Clock::now();
  testing::TempDir dir;
  ServiceConfig config;
  config.listen = "127.0.0.1:0";
  config.profile_path = dir / "profile.json";
  config.provider = "fixture:" + (testing::data_dir() / "journal_bank.json").string();
  Service service(config);
  const int port = service.bind();
  std::thread server([&] { service.serve(); });
  service.wait_until_ready();

  Failure failure;
  [&] {
    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/api/ingest/history", testing::read_file(testing::data_dir() / "linux_history.jsonl"),
                           "application/x-ndjson");
    if (!res || res->status != 200) {
      failure = "ingest failed";
      return;
    }
    const auto grade_of = [&](const std::string& url) -> std::optional<double> {
      auto r = client.Post("/api/search", R"({"query": "journal"})", "application/json");
      if (!r || r->status != 200) {
        std::fprintf(stderr, "search: %d %s\n", r ? r->status : -1, r ? r->body.c_str() : httplib::to_string(r.error()).c_str());
        return std::nullopt;
      }
      const json body = json::parse(r->body);
      for (const auto& item : body["results"]) {
        if (item["url"] == url) return item["grade"].get<double>();
      }
      return std::nullopt;
    };
    for (const std::string url : {"https://bulletjournal.com/", "https://www.linuxjournal.com/"}) {
      const auto before = grade_of(url);
      const json click = {{"query", "journal"}, {"url", url}, {"dwell_seconds", 240}};
      auto r = client.Post("/api/feedback/click", click.dump(), "application/json");
      const auto after = grade_of(url);
      if (!before || !r || r->status != 204 || !after) {
        failure = "request failed for " + url + (r ? " (click status " + std::to_string(r->status) + ": " + r->body + ")" : "");
        return;
      }
      if (*after < *before) {
        failure = fmt("%s grade fell %.6f -> %.6f", url.c_str(), *before, *after);
        return;
      }
    }
  }();
  service.stop();
  server.join();
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (!failure && seconds >= 2.0) failure = fmt("took %.3f s", seconds);
  return failure;
}

}  // namespace
}  // namespace persona

int main() {
  using namespace persona;
  struct Criterion {
    const char* name;
    Failure (*check)();
    double budget_seconds;  // 0 = no limit
  };
  const Criterion criteria[] = {
      {"formula fidelity (50 fixtures, 1e-9)", formula_fidelity, 5.0},
      {"percentile oracle (1000 draws)", percentile_oracle, 0.0},
      {"url grade bounds and monotonicity (1000 cases)", url_grade_property, 0.0},
      {"wob decay exactness and topic value", wob_decay_exactness, 0.0},
      {"cluster oracle (200 graphs)", cluster_oracle, 0.0},
      {"rerank membership and empty-profile neutrality", membership_and_neutrality, 0.0},
      {"linux journal lands in top 3", linux_journal_scenario, 1.0},
      {"end-to-end feedback loop", feedback_loop, 2.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Failure failure;
    try {
      failure = c.check();
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (!failure && c.budget_seconds > 0 && seconds >= c.budget_seconds) failure = fmt("took %.3f s", seconds);
    if (failure) {
      ++failures;
      std::printf("FAIL  %s (%.3f s): %s\n", c.name, seconds, failure->c_str());
    } else {
      std::printf("PASS  %s (%.3f s)\n", c.name, seconds);
    }
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
