#include "persona/service.h"

#include <algorithm>
#include <deque>
#include <map>

#include <httplib.h>

#include "persona/ingest.h"
#include "persona/profile_io.h"
#include "persona/profile_update.h"
#include "persona/reranker.h"
#include "persona/topic_engine.h"

namespace persona {

using nlohmann::json;

ProfileStore::ProfileStore(std::filesystem::path path, Profile initial, std::chrono::milliseconds writer_timeout)
    : path_(std::move(path)),
      writer_timeout_(writer_timeout),
      current_(std::make_shared<const Profile>(std::move(initial))) {}

std::shared_ptr<const Profile> ProfileStore::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return current_;
}

void ProfileStore::mutate(const std::function<void(Profile&)>& fn) {
  std::unique_lock writer(writer_mutex_, std::defer_lock);
  if (!writer.try_lock_for(writer_timeout_)) throw WriterBusyError("another update is in progress");
  auto next = std::make_shared<Profile>(*snapshot());
  fn(*next);
  save_profile(*next, path_);
  std::lock_guard lock(publish_mutex_);
  current_ = std::move(next);
}

json profile_summary(const Profile& profile) {
  json summary;
  const auto components = clusters(profile.topic_graph);
  summary["counts"] = {
      {"keywords", profile.keyword_db.size()},
      {"topics", profile.topic_graph.nodes().size()},
      {"edges", profile.topic_graph.edges().size()},
      {"clusters", components.size()},
      {"url_grades", profile.url_grades.size()},
      {"search_patterns", profile.search_patterns.size()},
      {"offline_terms", profile.offline_profile.size()},
  };
  summary["wob"] = {
      {"present", profile.visits.present.size()},
      {"prev", profile.visits.prev.size()},
      {"old", profile.visits.old.size()},
      {"event_limit", profile.wob_config.event_limit},
      {"size_limit_bytes", profile.wob_config.size_limit_bytes},
      {"freshness_factor", profile.wob_config.freshness_factor},
  };

  std::vector<const KeywordEntry*> keywords;
  for (const auto& [term, entry] : profile.keyword_db) keywords.push_back(&entry);
  std::stable_sort(keywords.begin(), keywords.end(),
                   [](const KeywordEntry* x, const KeywordEntry* y) { return x->frequency > y->frequency; });
  summary["top_keywords"] = json::array();
  for (std::size_t i = 0; i < keywords.size() && i < 20; ++i) {
    summary["top_keywords"].push_back(
        {{"term", keywords[i]->term}, {"frequency", keywords[i]->frequency}, {"percentile", keywords[i]->percentile_grade}});
  }

  summary["topics"] = json::array();
  const auto ranking = rank_topics(profile.topic_graph);
  for (std::size_t i = 0; i < ranking.size() && i < 10; ++i) {
    summary["topics"].push_back({{"name", ranking[i].name}, {"value", ranking[i].value}, {"cluster", ranking[i].cluster}});
  }

  const auto& c = profile.coefficients;
  summary["coefficients"] = {{"a", c.a()}, {"b", c.b()}, {"c", c.c()}, {"d", c.d()}, {"e", c.e()}, {"f", c.f()}};
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

class NotFound : public Error {
 public:
  using Error::Error;
};

constexpr std::size_t kBankCacheSize = 64;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, std::optional<bool> retryable = {}) {
  json body = {{"error", message}};
  if (retryable) body["retryable"] = *retryable;
  send_json(res, status, body);
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body);
  if (!body.is_object()) throw ValidationError("request body must be a JSON object");
  return body;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  EngineConfig engine;
  std::unique_ptr<SearchProvider> provider;
  std::unique_ptr<ProfileStore> store;
  httplib::Server server;

  std::mutex bank_mutex;
  std::map<std::string, SearchBank> banks;
  std::deque<std::string> bank_order;

  void remember_bank(const SearchBank& bank) {
    std::lock_guard lock(bank_mutex);
    const std::string key = normalize_query_key(bank.query);
    if (!banks.contains(key)) {
      bank_order.push_back(key);
      if (bank_order.size() > kBankCacheSize) {
        banks.erase(bank_order.front());
        bank_order.pop_front();
      }
    }
    banks[key] = bank;
  }

  std::optional<SearchResult> shown_result(const std::string& query, const std::string& url) {
    std::lock_guard lock(bank_mutex);
    const auto it = banks.find(normalize_query_key(query));
    if (it == banks.end()) return std::nullopt;
    for (const auto& result : it->second.results) {
      if (result.url == url) return result;
    }
    return std::nullopt;
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static httplib::Server::Handler guarded(Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const json::exception& e) {
        send_error(res, 400, std::string("malformed request: ") + e.what());
      } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
      } catch (const NotFound& e) {
        send_error(res, 404, e.what());
      } catch (const WriterBusyError& e) {
        send_error(res, 409, e.what());
      } catch (const ProviderError& e) {
        send_error(res, 503, e.what(), e.retryable());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  bool origin_allowed(const std::string& origin) const {
    const auto& allowed = config.cors_allowed_origins;
    return std::find(allowed.begin(), allowed.end(), "*") != allowed.end() ||
           std::find(allowed.begin(), allowed.end(), origin) != allowed.end();
  }

  void install_routes() {
    server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      const std::string origin = req.get_header_value("Origin");
      if (!origin.empty() && origin_allowed(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      }
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Max-Age", "600");
    });

    server.Get("/api/profile/summary", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, profile_summary(*store->snapshot()));
               }));

    server.Post("/api/ingest/history", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto parsed = parse_history_text(req.body);
                  IngestReport report;
                  store->mutate([&](Profile& profile) { report = ingest_visits(profile, parsed.records, engine); });
                  json rejected = json::array();
                  for (const auto& r : parsed.rejects) rejected.push_back({{"row", r.row}, {"reason", r.reason}});
                  send_json(res, 200,
                            {{"accepted", report.accepted}, {"rejected", rejected}, {"rotations", report.rotations}});
                }));

    server.Post("/api/search", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  const std::string query = body.at("query").get<std::string>();
                  if (normalize_query_key(query).empty()) throw ValidationError("query must not be empty");
                  const std::size_t n = body.value("n", config.bank_size);
                  if (n == 0 || n > 1000) throw ValidationError("n must be in 1..1000");

                  const SearchBank bank = fetch_results(query, *provider, n);
                  remember_bank(bank);
                  const auto profile = store->snapshot();
                  const RerankContext context(*profile, engine.tokenizer);
                  const auto ranked = rerank(bank, context);

                  json results = json::array();
                  for (std::size_t i = 0; i < ranked.size(); ++i) {
                    const auto& [result, grade] = ranked[i];
                    results.push_back({{"url", result.url},
                                       {"title", result.title},
                                       {"snippet", result.snippet},
                                       {"web_rank", result.web_rank},
                                       {"revised_rank", i + 1},
                                       {"grade", grade.grade},
                                       {"signals",
                                        {{"u_g", grade.u_g},
                                         {"k_w", grade.k_w},
                                         {"t_v", grade.t_v},
                                         {"o_v", grade.o_v},
                                         {"w_r", grade.w_r},
                                         {"s_g", grade.s_g}}}});
                  }
                  send_json(res, 200,
                            {{"query", query},
                             {"provider", provider->describe()},
                             {"bank_size", bank.results.size()},
                             {"results", results}});
                }));

    server.Post("/api/feedback/click", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  const std::string query = body.at("query").get<std::string>();
                  const std::string url = body.at("url").get<std::string>();
                  const std::int64_t dwell = body.at("dwell_seconds").get<std::int64_t>();
                  if (dwell < 0) throw ValidationError("dwell_seconds must be non-negative");
                  const auto result = shown_result(query, url);
                  if (!result) throw NotFound("no search for '" + query + "' showed " + url);
                  const Timestamp now = std::chrono::duration_cast<std::chrono::seconds>(
                                            std::chrono::system_clock::now().time_since_epoch())
                                            .count();
                  store->mutate([&](Profile& profile) { profile = record_click(std::move(profile), *result, dwell, now, engine); });
                  res.status = 204;
                }));

    server.Delete(R"(/api/profile/keyword/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::string term = req.matches[1];
                    store->mutate([&](Profile& profile) {
                      if (!remove_keyword(profile, term)) throw NotFound("unknown keyword '" + term + "'");
                    });
                    send_json(res, 200, {{"deleted", term}});
                  }));

    server.Put(R"(/api/profile/keyword/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string term = req.matches[1];
                 const json body = parse_body(req);
                 const auto& frequency = body.at("frequency");
                 if (!frequency.is_number_integer()) throw ValidationError("frequency must be an integer");
                 KeywordEntry entry;
                 store->mutate([&](Profile& profile) {
                   set_keyword_frequency(profile, term, frequency.get<std::int64_t>());
                   entry = profile.keyword_db.at(term);
                 });
                 send_json(res, 200,
                           {{"term", entry.term}, {"frequency", entry.frequency}, {"percentile", entry.percentile_grade}});
               }));

    server.Delete(R"(/api/profile/topic/(.+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::string name = req.matches[1];
                    store->mutate([&](Profile& profile) {
                      if (!remove_topic(profile, name)) throw NotFound("unknown topic '" + name + "'");
                    });
                    send_json(res, 200, {{"deleted", name}});
                  }));

    server.Post("/api/profile/rotate", guarded([this](const httplib::Request&, httplib::Response& res) {
                  store->mutate([&](Profile& profile) { profile = rotate_and_regrade(std::move(profile), engine); });
                  send_json(res, 200, profile_summary(*store->snapshot())["wob"]);
                }));
  }
};

Service::Service(ServiceConfig config, std::unique_ptr<SearchProvider> provider) : impl_(std::make_unique<Impl>()) {
  impl_->engine = engine_config(config);
  if (!provider) {
    if (config.provider.empty()) throw ValidationError("no search provider configured");
    provider = make_provider(config.provider);
  }
  impl_->provider = std::move(provider);
  Profile profile = load_or_create_profile(config.profile_path);
  apply_profile_overrides(config, profile);
  impl_->store = std::make_unique<ProfileStore>(config.profile_path, std::move(profile), config.writer_timeout);
  impl_->config = std::move(config);
  impl_->install_routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  const auto [host, port] = split_listen(impl_->config.listen);
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + impl_->config.listen);
  return port;
}

void Service::serve() {
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

ProfileStore& Service::store() { return *impl_->store; }

}  // namespace persona
