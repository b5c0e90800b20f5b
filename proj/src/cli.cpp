#include "persona/cli.h"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "persona/config.h"
#include "persona/errors.h"
#include "persona/ingest.h"
#include "persona/profile_io.h"
#include "persona/profile_update.h"
#include "persona/reranker.h"
#include "persona/service.h"
#include "persona/topic_engine.h"

namespace persona {

namespace {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

Timestamp now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::set<std::string> read_url_list(const std::string& path) {
  std::set<std::string> urls;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    urls.insert(line.substr(first, last - first + 1));
  }
  return urls;
}

// Serves until SIGINT/SIGTERM.
void serve_until_signalled(Service& service, std::ostream& out, const std::string& listen, int port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done.load()) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) {
        service.stop();
        return;
      }
    }
  });
  out << "listening on " << listen.substr(0, listen.rfind(':')) << ':' << port << std::endl;
  service.serve();
  done = true;
  watcher.join();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"persona: personalized re-ranking of search results"};
  app.name("persona");
  app.require_subcommand(1);

  std::string config_path;
  std::string profile_path;
  std::string provider_spec;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--profile", profile_path, "profile JSON file (overrides config and PERSONA_PROFILE)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Feed browsing history or local documents into the profile");
  ingest->require_subcommand(1);
  std::string history_file;
  auto* ingest_history = ingest->add_subcommand("history", "Ingest a JSON-lines history export");
  ingest_history->add_option("file", history_file, "history export")->required();
  std::vector<std::string> doc_paths;
  DocumentSelection selection;
  auto* ingest_docs = ingest->add_subcommand("docs", "Ingest local documents into the offline profile");
  ingest_docs->add_option("paths", doc_paths, "files or directories")->required();
  ingest_docs->add_option("--include", selection.include, "glob on file names to include (repeatable)");
  ingest_docs->add_option("--exclude", selection.exclude, "glob on file names to exclude (repeatable)");

  // search
  std::string query;
  std::size_t bank_size = 0;
  bool explain = false;
  double threshold = 0.0;
  auto* search = app.add_subcommand("search", "Fetch results and print them re-ranked");
  search->add_option("query", query)->required();
  search->add_option("--provider", provider_spec, "fixture:<file> or http(s)://...{query}...");
  search->add_option("--n", bank_size, "search bank size")->check(CLI::Range(1, 1000));
  search->add_flag("--explain", explain, "print the six signals per result");
  search->add_option("--threshold", threshold, "drop results graded at or below this");

  // topics
  auto* topics = app.add_subcommand("topics", "Inspect the topic graph");
  topics->require_subcommand(1);
  auto* topics_list = topics->add_subcommand("list", "Topics by value with their cluster");
  auto* topics_export = topics->add_subcommand("export", "Edge list: a, b, weight, kind (tab separated)");

  // profile
  auto* profile_cmd = app.add_subcommand("profile", "Show or adjust the profile");
  profile_cmd->require_subcommand(1);
  auto* profile_show = profile_cmd->add_subcommand("show", "Summary as JSON");
  auto* profile_rotate = profile_cmd->add_subcommand("rotate", "Force a WOB rotation");
  std::vector<double> coefficient_values;
  auto* set_coefficients = profile_cmd->add_subcommand("set-coefficients", "Set a b c d e f (must sum to 1)");
  set_coefficients->add_option("values", coefficient_values, "a b c d e f")->required()->expected(6);

  // eval
  auto* eval = app.add_subcommand("eval", "Offline evaluation");
  eval->require_subcommand(1);
  std::string bank_file;
  std::string relevant_file;
  std::string eval_query;
  auto* compare = eval->add_subcommand("compare", "Rank-shift report of the personalized order as CSV");
  compare->add_option("--bank", bank_file, "fixture file holding the original results")->required();
  compare->add_option("--relevant", relevant_file, "relevant URLs, one per line")->required();
  compare->add_option("--query", eval_query, "query inside the fixture (needed if it holds several)");
  compare->add_option("--n", bank_size, "search bank size")->check(CLI::Range(1, 1000));

  // serve
  std::string listen;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--provider", provider_spec, "fixture:<file> or http(s)://...{query}...");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    ServiceConfig config = config_path.empty() ? ServiceConfig{} : load_service_config(config_path);
    apply_env_overrides(config);
    if (!profile_path.empty()) config.profile_path = profile_path;
    if (!provider_spec.empty()) config.provider = provider_spec;
    if (!listen.empty()) {
      split_listen(listen);
      config.listen = listen;
    }
    if (bank_size == 0) bank_size = config.bank_size;
    const EngineConfig engine = engine_config(config);

    const auto load = [&] {
      Profile profile = load_or_create_profile(config.profile_path);
      apply_profile_overrides(config, profile);
      return profile;
    };

    if (*ingest_history) {
      const auto parsed = parse_history_text(read_file(history_file));
      Profile profile = load();
      const auto report = ingest_visits(profile, parsed.records, engine);
      save_profile(profile, config.profile_path);
      for (const auto& reject : parsed.rejects) {
        err << history_file << ':' << reject.row << ": " << reject.reason << '\n';
      }
      out << "accepted " << report.accepted << ", rejected " << parsed.rejects.size() << ", rotations "
          << report.rotations << '\n';
    } else if (*ingest_docs) {
      std::vector<std::filesystem::path> paths(doc_paths.begin(), doc_paths.end());
      const auto scan = scan_documents(paths, selection, now_seconds());
      Profile profile = load();
      ingest_documents(profile, scan.documents, engine);
      save_profile(profile, config.profile_path);
      for (const auto& warning : scan.warnings) err << warning.path.string() << ": " << warning.message << '\n';
      out << "documents " << scan.documents.size() << ", warnings " << scan.warnings.size() << ", offline terms "
          << profile.offline_profile.size() << '\n';
    } else if (*search) {
      if (config.provider.empty()) throw ValidationError("no provider: pass --provider or set PERSONA_PROVIDER");
      auto provider = make_provider(config.provider);
      const Profile profile = load();
      const SearchBank bank = fetch_results(query, *provider, bank_size);
      const RerankContext context(profile, engine.tokenizer);
      const auto ranked = rerank(bank, context, threshold);
      out << (explain ? "rank\tweb_rank\tgrade\tu_g\tk_w\tt_v\to_v\tw_r\ts_g\turl\ttitle\n"
                      : "rank\tweb_rank\tgrade\turl\ttitle\n");
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& [result, grade] = ranked[i];
        out << i + 1 << '\t' << result.web_rank << '\t' << format_double(grade.grade) << '\t';
        if (explain) {
          for (double signal : {grade.u_g, grade.k_w, grade.t_v, grade.o_v, grade.w_r, grade.s_g}) {
            out << format_double(signal) << '\t';
          }
        }
        out << result.url << '\t' << result.title << '\n';
      }
    } else if (*topics_list) {
      const Profile profile = load();
      out << "topic\tvalue\tcluster\n";
      for (const auto& topic : rank_topics(profile.topic_graph)) {
        out << topic.name << '\t' << format_double(topic.value) << '\t' << topic.cluster << '\n';
      }
    } else if (*topics_export) {
      out << export_edge_list(load().topic_graph);
    } else if (*profile_show) {
      out << profile_summary(load()).dump(2) << '\n';
    } else if (*profile_rotate) {
      Profile profile = rotate_and_regrade(load(), engine);
      save_profile(profile, config.profile_path);
      out << "rotated: present " << profile.visits.present.size() << ", prev " << profile.visits.prev.size()
          << ", old " << profile.visits.old.size() << '\n';
    } else if (*set_coefficients) {
      const auto& v = coefficient_values;
      const GradeCoefficients coefficients(v[0], v[1], v[2], v[3], v[4], v[5]);
      Profile profile = load();
      profile.coefficients = coefficients;
      save_profile(profile, config.profile_path);
      out << "coefficients updated\n";
    } else if (*compare) {
      FixtureProvider provider = FixtureProvider::from_file(bank_file);
      if (eval_query.empty()) {
        if (provider.queries().size() != 1) throw ValidationError("fixture holds several queries; pass --query");
        eval_query = provider.queries().begin()->first;
      }
      const Profile profile = load();
      const SearchBank bank = fetch_results(eval_query, provider, bank_size);
      const auto relevant = read_url_list(relevant_file);
      std::vector<SearchResult> personalized;
      for (const auto& [result, grade] : rerank(bank, RerankContext(profile, engine.tokenizer))) {
        personalized.push_back(result);
      }
      const auto report = compare_rankings(bank, personalized, relevant);
      out << report.to_csv();
      err << "mean shift " << format_double(report.mean_shift);
      for (const auto& hits : report.top_k) err << ", top" << hits.k << ' ' << hits.original << "->" << hits.revised;
      err << ", not retrieved " << report.not_retrieved.size() << '\n';
    } else if (*serve) {
      Service service(config);
      const int port = service.bind();
      serve_until_signalled(service, out, config.listen, port);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace persona
