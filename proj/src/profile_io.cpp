#include "persona/profile_io.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "persona/errors.h"

namespace persona {

using nlohmann::json;

namespace {

json visit_to_json(const VisitRecord& v) {
  return json{{"url", v.url},
              {"title", v.title},
              {"visit_time", v.visit_time},
              {"duration", v.duration},
              {"transition", v.transition == Transition::kTyped ? "typed" : "clicked"},
              {"last_modified_time", v.last_modified_time}};
}

VisitRecord visit_from_json(const json& j) {
  VisitRecord v;
  v.url = j.at("url").get<std::string>();
  v.title = j.at("title").get<std::string>();
  v.visit_time = j.at("visit_time").get<Timestamp>();
  v.duration = j.at("duration").get<std::int64_t>();
  const auto transition = j.at("transition").get<std::string>();
  if (transition != "typed" && transition != "clicked") throw ParseError("bad transition " + transition, std::nullopt);
  v.transition = transition == "typed" ? Transition::kTyped : Transition::kClicked;
  v.last_modified_time = j.at("last_modified_time").get<Timestamp>();
  return v;
}

json entry_to_json(const KeywordEntry& e) {
  return json{{"term", e.term}, {"frequency", e.frequency}, {"percentile_grade", e.percentile_grade}};
}

KeywordEntry entry_from_json(const json& j) {
  return KeywordEntry{j.at("term").get<std::string>(), j.at("frequency").get<std::int64_t>(),
                      j.at("percentile_grade").get<double>()};
}

json db_to_json(const KeywordDb& db) {
  json out = json::array();
  for (const auto& [term, entry] : db) out.push_back(entry_to_json(entry));
  return out;
}

KeywordDb db_from_json(const json& j) {
  KeywordDb db;
  for (const auto& item : j) {
    KeywordEntry entry = entry_from_json(item);
    const std::string term = entry.term;
    if (!db.emplace(term, std::move(entry)).second) throw ParseError("duplicate keyword " + term, std::nullopt);
  }
  return db;
}

json graph_to_json(const TopicGraph& graph) {
  json nodes = json::array();
  for (const auto& [name, node] : graph.nodes()) {
    json keywords = json::array();
    for (const auto& entry : node.keyword_tree.entries()) keywords.push_back(entry_to_json(entry));
    nodes.push_back(json{{"name", name},
                         {"weight_present", node.weight_present},
                         {"weight_prev", node.weight_prev},
                         {"weight_old", node.weight_old},
                         {"keywords", std::move(keywords)}});
  }
  json edges = json::array();
  for (const auto& [key, weight] : graph.edges()) {
    edges.push_back(json{{"a", key.a}, {"b", key.b}, {"w", weight}, {"kind", to_string(key.kind)}});
  }
  json pages = json::array();
  for (const auto& [url, topic] : graph.page_topics()) pages.push_back(json{{"url", url}, {"topic", topic}});
  return json{{"edge_prune_threshold", graph.edge_prune_threshold()},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"pages", std::move(pages)}};
}

TopicGraph graph_from_json(const json& j) {
  TopicGraph graph(j.at("edge_prune_threshold").get<double>());
  for (const auto& item : j.at("nodes")) {
    std::vector<KeywordEntry> heap;
    for (const auto& kw : item.at("keywords")) heap.push_back(entry_from_json(kw));
    TopicNode node;
    node.name = item.at("name").get<std::string>();
    node.keyword_tree = KeywordTree::from_heap(std::move(heap));
    node.weight_present = item.at("weight_present").get<double>();
    node.weight_prev = item.at("weight_prev").get<double>();
    node.weight_old = item.at("weight_old").get<double>();
    if (node.keyword_tree.empty() || node.keyword_tree.root_term() != node.name) {
      throw ParseError("topic " + node.name + " does not match its keyword tree root", std::nullopt);
    }
    graph.add_node(std::move(node));
  }
  for (const auto& item : j.at("edges")) {
    const auto a = item.at("a").get<std::string>();
    const auto b = item.at("b").get<std::string>();
    if (!(a < b)) throw ParseError("edge endpoints must satisfy a < b", std::nullopt);
    const auto kind = item.at("kind").get<std::string>();
    if (kind != "sim" && kind != "link") throw ParseError("bad edge kind " + kind, std::nullopt);
    graph.set_edge(a, b, kind == "sim" ? EdgeKind::kSimilarity : EdgeKind::kHyperlink, item.at("w").get<double>());
  }
  for (const auto& item : j.at("pages")) {
    graph.map_page(item.at("url").get<std::string>(), item.at("topic").get<std::string>());
  }
  return graph;
}

json profile_to_json(const Profile& p) {
  const auto band = [](const std::vector<VisitRecord>& visits) {
    json out = json::array();
    for (const auto& v : visits) out.push_back(visit_to_json(v));
    return out;
  };
  json url_grades = json::array();
  for (const auto& [url, g] : p.url_grades) {
    url_grades.push_back(json{{"url", g.url},
                              {"frequency_pct", g.frequency_pct},
                              {"duration_pct", g.duration_pct},
                              {"typed", g.typed},
                              {"freshness_value", g.freshness_value},
                              {"total", g.total}});
  }
  json patterns = json::array();
  for (const auto& q : p.search_patterns) {
    patterns.push_back(json{{"raw_query", q.raw_query},
                            {"terms", q.terms},
                            {"issued_at", q.issued_at},
                            {"frequency", q.frequency},
                            {"percentile_grade", q.percentile_grade}});
  }
  const auto& c = p.coefficients;
  return json{
      {"version", kProfileFormatVersion},
      {"wob_config",
       {{"size_limit_bytes", p.wob_config.size_limit_bytes},
        {"event_limit", p.wob_config.event_limit},
        {"freshness_factor", p.wob_config.freshness_factor}}},
      {"visits", {{"present", band(p.visits.present)}, {"prev", band(p.visits.prev)}, {"old", band(p.visits.old)}}},
      {"keyword_db", db_to_json(p.keyword_db)},
      {"topic_graph", graph_to_json(p.topic_graph)},
      {"url_grades", std::move(url_grades)},
      {"search_patterns", std::move(patterns)},
      {"offline_profile", db_to_json(p.offline_profile)},
      {"coefficients", {{"a", c.a()}, {"b", c.b()}, {"c", c.c()}, {"d", c.d()}, {"e", c.e()}, {"f", c.f()}}},
  };
}

Profile profile_from_json(const json& j) {
  Profile p;
  const auto& wob = j.at("wob_config");
  p.wob_config.size_limit_bytes = wob.at("size_limit_bytes").get<std::uint64_t>();
  p.wob_config.event_limit = wob.at("event_limit").get<std::uint64_t>();
  p.wob_config.freshness_factor = wob.at("freshness_factor").get<double>();
  p.wob_config.validate();

  const auto& visits = j.at("visits");
  for (const auto& [key, band] : {std::pair{"present", &p.visits.present}, std::pair{"prev", &p.visits.prev},
                                  std::pair{"old", &p.visits.old}}) {
    for (const auto& item : visits.at(key)) band->push_back(visit_from_json(item));
  }

  p.keyword_db = db_from_json(j.at("keyword_db"));
  p.topic_graph = graph_from_json(j.at("topic_graph"));

  for (const auto& item : j.at("url_grades")) {
    UrlGrade g;
    g.url = item.at("url").get<std::string>();
    g.frequency_pct = item.at("frequency_pct").get<double>();
    g.duration_pct = item.at("duration_pct").get<double>();
    g.typed = item.at("typed").get<int>();
    g.freshness_value = item.at("freshness_value").get<double>();
    g.total = item.at("total").get<double>();
    const std::string url = g.url;
    p.url_grades.emplace(url, std::move(g));
  }
  for (const auto& item : j.at("search_patterns")) {
    SearchQueryRecord q;
    q.raw_query = item.at("raw_query").get<std::string>();
    q.terms = item.at("terms").get<std::vector<std::string>>();
    q.issued_at = item.at("issued_at").get<Timestamp>();
    q.frequency = item.at("frequency").get<std::int64_t>();
    q.percentile_grade = item.at("percentile_grade").get<double>();
    p.search_patterns.push_back(std::move(q));
  }
  p.offline_profile = db_from_json(j.at("offline_profile"));

  const auto& c = j.at("coefficients");
  p.coefficients = GradeCoefficients(c.at("a").get<double>(), c.at("b").get<double>(), c.at("c").get<double>(),
                                     c.at("d").get<double>(), c.at("e").get<double>(), c.at("f").get<double>());
  return p;
}

}  // namespace

std::string serialize_profile(const Profile& profile) { return profile_to_json(profile).dump(2) + "\n"; }

Profile parse_profile(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("profile is not valid JSON", e.byte);
  }
  if (!doc.is_object()) throw ParseError("profile must be a JSON object", std::nullopt);
  const auto version = doc.find("version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw ParseError("profile has no integer version", std::nullopt);
  }
  if (version->get<long long>() != kProfileFormatVersion) throw UnsupportedVersionError(version->get<long long>());

  try {
    return profile_from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed profile: ") + e.what(), std::nullopt);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("inconsistent profile: ") + e.what(), std::nullopt);
  }
}

void save_profile(const Profile& profile, const std::filesystem::path& path) {
  const std::string text = serialize_profile(profile);
  std::filesystem::path tmp = path;
  tmp += ".tmp";

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot write " + tmp.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < text.size()) {
    const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      ::close(fd);
      throw IoError("write failed for " + tmp.string() + ": " + std::strerror(saved));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError("cannot flush " + tmp.string());

  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

Profile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_profile(buffer.str());
}

Profile load_or_create_profile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return Profile{};
  return load_profile(path);
}

}  // namespace persona
