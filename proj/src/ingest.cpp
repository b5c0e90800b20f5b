#include "persona/ingest.h"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "persona/errors.h"
#include "persona/url.h"

namespace persona {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Returns the visit or the reject reason.
std::variant<VisitRecord, std::string> parse_row(std::string_view line) {
  json row;
  try {
    row = json::parse(line);
  } catch (const json::parse_error&) {
    return std::string("malformed json");
  }
  if (!row.is_object()) return std::string("row is not an object");

  VisitRecord visit;
  const auto url = row.find("url");
  if (url == row.end() || !url->is_string() || url->get_ref<const std::string&>().empty()) {
    return std::string("missing url");
  }
  visit.url = url->get<std::string>();
  if (!is_valid_url(visit.url)) return std::string("invalid url");

  if (const auto title = row.find("title"); title != row.end()) {
    if (!title->is_string()) return std::string("invalid title");
    visit.title = title->get<std::string>();
  }

  const auto time = row.find("visit_time");
  if (time == row.end()) return std::string("missing visit_time");
  if (!time->is_number_integer() || time->get<std::int64_t>() <= 0) return std::string("invalid visit_time");
  visit.visit_time = time->get<std::int64_t>();
  visit.last_modified_time = visit.visit_time;

  const auto duration = row.find("duration");
  if (duration == row.end()) return std::string("missing duration");
  if (!duration->is_number_integer() || duration->get<std::int64_t>() < 0) return std::string("invalid duration");
  visit.duration = duration->get<std::int64_t>();

  visit.transition = Transition::kClicked;
  if (const auto transition = row.find("transition"); transition != row.end()) {
    if (!transition->is_string()) return std::string("invalid transition");
    if (transition->get_ref<const std::string&>() == "typed") visit.transition = Transition::kTyped;
  }
  return visit;
}

enum class FileFormat { kPlain, kHtml, kOther };

FileFormat format_of(const std::filesystem::path& file) {
  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const std::set<std::string> kPlain = {".txt", ".text", ".md", ".markdown", ".rst", ".csv", ".log"};
  static const std::set<std::string> kHtml = {".html", ".htm", ".xhtml"};
  if (kPlain.contains(ext)) return FileFormat::kPlain;
  if (kHtml.contains(ext)) return FileFormat::kHtml;
  return FileFormat::kOther;
}

std::vector<std::filesystem::path> collect_files(std::span<const std::filesystem::path> paths,
                                                 const DocumentSelection& selection,
                                                 std::vector<ScanWarning>& warnings) {
  std::vector<std::filesystem::path> files;
  for (const auto& root : paths) {
    std::error_code ec;
    if (std::filesystem::is_directory(root, ec)) {
      auto it = std::filesystem::recursive_directory_iterator(
          root, std::filesystem::directory_options::skip_permission_denied, ec);
      for (; !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (it->is_regular_file(ec) && selection.accepts(it->path())) files.push_back(it->path());
      }
      if (ec) warnings.push_back({root, "directory walk failed: " + ec.message()});
    } else if (std::filesystem::exists(root, ec)) {
      if (selection.accepts(root)) files.push_back(root);
    } else {
      warnings.push_back({root, "path does not exist"});
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

using ScanOutcome = std::variant<DocumentRecord, ScanWarning>;

ScanOutcome scan_one(const std::filesystem::path& file, Timestamp scanned_at) {
  const FileFormat format = format_of(file);
  DocumentRecord doc{file, DocumentKind::kText, {}, scanned_at};
  if (format == FileFormat::kOther) {
    doc.kind = DocumentKind::kMetadata;
    doc.extracted_text = filename_text(file);
    return doc;
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) return ScanWarning{file, "cannot open file"};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) return ScanWarning{file, "read error"};
  doc.extracted_text = format == FileFormat::kHtml ? strip_html(buffer.str()) : buffer.str();
  return doc;
}

ScanResult merge_outcomes(std::vector<ScanOutcome>& outcomes, std::vector<ScanWarning> warnings) {
  ScanResult result;
  result.warnings = std::move(warnings);
  for (auto& outcome : outcomes) {
    if (auto* doc = std::get_if<DocumentRecord>(&outcome)) {
      result.documents.push_back(std::move(*doc));
    } else {
      result.warnings.push_back(std::get<ScanWarning>(std::move(outcome)));
    }
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

HistoryParseResult parse_history(std::istream& in) {
  if (!in) throw IoError("history stream is not readable");
  HistoryParseResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    auto parsed = parse_row(content);
    if (auto* visit = std::get_if<VisitRecord>(&parsed)) {
      result.records.push_back(std::move(*visit));
    } else {
      result.rejects.push_back({line_number, std::get<std::string>(parsed)});
    }
  }
  if (in.bad()) throw IoError("error while reading history stream");
  return result;
}

HistoryParseResult parse_history_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_history(in);
}

std::string to_history_line(const VisitRecord& visit) {
  json row;
  row["url"] = visit.url;
  row["title"] = visit.title;
  row["visit_time"] = visit.visit_time;
  row["duration"] = visit.duration;
  row["transition"] = visit.transition == Transition::kTyped ? "typed" : "clicked";
  return row.dump();
}

// ---------------------------------------------------------------------------

std::vector<SearchEngineRule> default_search_engines() {
  const auto engine = [](std::string name, const std::string& host_pattern, std::string parameter) {
    return SearchEngineRule{std::move(name), std::regex(host_pattern, std::regex::ECMAScript | std::regex::optimize),
                            std::move(parameter)};
  };
  return {
      engine("google", R"(^(?:[a-z0-9-]+\.)*google(?:\.[a-z0-9-]+)+$)", "q"),
      engine("bing", R"(^(?:[a-z0-9-]+\.)*bing(?:\.[a-z0-9-]+)+$)", "q"),
      engine("yahoo", R"(^(?:[a-z0-9-]+\.)*search\.yahoo(?:\.[a-z0-9-]+)+$)", "p"),
  };
}

std::optional<std::string> search_text_of(std::string_view url, std::span<const SearchEngineRule> engines) {
  const auto parsed = parse_url(url);
  if (!parsed) return std::nullopt;
  for (const auto& engine : engines) {
    if (!std::regex_match(parsed->host, engine.host)) continue;
    for (auto& [key, value] : parse_query(parsed->query)) {
      if (key == engine.parameter && !trim(value).empty()) return std::move(value);
    }
  }
  return std::nullopt;
}

std::vector<SearchQueryRecord> extract_search_queries(std::span<const VisitRecord> visits,
                                                      std::span<const SearchEngineRule> engines,
                                                      const TokenizerConfig& tokenizer) {
  std::map<std::string, SearchQueryRecord> by_query;
  for (const auto& visit : visits) {
    const auto text = search_text_of(visit.url, engines);
    if (!text) continue;

    const auto words = tokenize_words(*text);
    if (words.empty()) continue;
    std::string normalized;
    for (const auto& word : words) {
      if (!normalized.empty()) normalized.push_back(' ');
      normalized += word;
    }
    auto terms = extract_terms(*text, tokenizer);
    if (terms.empty()) continue;  // nothing a result could ever match

    auto [it, inserted] = by_query.try_emplace(normalized);
    SearchQueryRecord& record = it->second;
    if (inserted) {
      record.raw_query = normalized;
      record.terms = std::move(terms);
      record.issued_at = visit.visit_time;
      record.frequency = 1;
    } else {
      record.issued_at = std::max(record.issued_at, visit.visit_time);
      ++record.frequency;
    }
  }
  std::vector<SearchQueryRecord> out;
  out.reserve(by_query.size());
  for (auto& [query, record] : by_query) out.push_back(std::move(record));
  return out;
}

// ---------------------------------------------------------------------------

bool DocumentSelection::accepts(const std::filesystem::path& file) const {
  const std::string name = file.filename().string();
  const auto matches = [&](const std::string& glob) { return ::fnmatch(glob.c_str(), name.c_str(), 0) == 0; };
  if (!include.empty() && std::none_of(include.begin(), include.end(), matches)) return false;
  return std::none_of(exclude.begin(), exclude.end(), matches);
}

std::string filename_text(const std::filesystem::path& file) {
  std::string stem = file.stem().string();
  std::replace_if(stem.begin(), stem.end(), [](char c) { return c == '_' || c == '-' || c == '.'; }, ' ');
  std::string out;
  for (const auto& word : tokenize_words(stem)) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

ScanResult scan_documents_serial(std::span<const std::filesystem::path> paths, const DocumentSelection& selection,
                                 Timestamp scanned_at) {
  std::vector<ScanWarning> warnings;
  const auto files = collect_files(paths, selection, warnings);
  std::vector<ScanOutcome> outcomes;
  outcomes.reserve(files.size());
  for (const auto& file : files) {
    try {
      outcomes.push_back(scan_one(file, scanned_at));
    } catch (const std::exception& e) {
      outcomes.push_back(ScanWarning{file, e.what()});
    }
  }
  return merge_outcomes(outcomes, std::move(warnings));
}

ScanResult scan_documents(std::span<const std::filesystem::path> paths, const DocumentSelection& selection,
                          Timestamp scanned_at) {
  std::vector<ScanWarning> warnings;
  const auto files = collect_files(paths, selection, warnings);
  std::vector<ScanOutcome> outcomes(files.size(), ScanWarning{});
  const auto count = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      outcomes[i] = scan_one(files[i], scanned_at);
    } catch (const std::exception& e) {
      outcomes[i] = ScanWarning{files[i], e.what()};
    }
  }
  return merge_outcomes(outcomes, std::move(warnings));
}

}  // namespace persona
