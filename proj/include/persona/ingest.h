#pragma once

// Parsing of browsing-history exports and local documents.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "persona/profile_model.h"
#include "persona/text.h"

namespace persona {

// ---------------------------------------------------------------------------
// History export (JSON lines):
//   {"url": str, "title": str, "visit_time": int, "duration": int, "transition": "typed"|"clicked"}

struct RejectedRow {
  std::size_t row = 0;  // 1-based line number
  std::string reason;
};

struct HistoryParseResult {
  std::vector<VisitRecord> records;
  std::vector<RejectedRow> rejects;
};

// Every non-blank line is a row and ends up in exactly one of records/rejects.
// Throws IoError if the stream cannot be read.
HistoryParseResult parse_history(std::istream& in);
HistoryParseResult parse_history_text(std::string_view text);

// Single JSON line in the export schema.
std::string to_history_line(const VisitRecord& visit);

// ---------------------------------------------------------------------------
// Search queries embedded in visited URLs

struct SearchEngineRule {
  std::string name;
  std::regex host;        // matched against the lowercased host
  std::string parameter;  // query-string key holding the search text
};

// q on google.* and bing.*, p on search.yahoo.*
std::vector<SearchEngineRule> default_search_engines();

// Decoded search text if url belongs to a configured engine.
std::optional<std::string> search_text_of(std::string_view url, std::span<const SearchEngineRule> engines);

// One record per distinct normalized query, frequencies summed, sorted by query.
std::vector<SearchQueryRecord> extract_search_queries(std::span<const VisitRecord> visits,
                                                      std::span<const SearchEngineRule> engines,
                                                      const TokenizerConfig& tokenizer);

// ---------------------------------------------------------------------------
// Local documents

enum class DocumentKind { kText, kMetadata };

struct DocumentRecord {
  std::filesystem::path path;
  DocumentKind kind = DocumentKind::kText;
  std::string extracted_text;
  Timestamp scanned_at = 0;
};

struct ScanWarning {
  std::filesystem::path path;
  std::string message;
};

// fnmatch-style globs tested against the file name.
struct DocumentSelection {
  std::vector<std::string> include;  // empty = everything
  std::vector<std::string> exclude;

  bool accepts(const std::filesystem::path& file) const;
};

struct ScanResult {
  std::vector<DocumentRecord> documents;
  std::vector<ScanWarning> warnings;
};

// Directories are walked recursively. Output is sorted by path regardless of
// thread count. Unreadable files become warnings.
ScanResult scan_documents(std::span<const std::filesystem::path> paths, const DocumentSelection& selection,
                          Timestamp scanned_at);
// Single-threaded reference used to check the parallel scan.
ScanResult scan_documents_serial(std::span<const std::filesystem::path> paths, const DocumentSelection& selection,
                                 Timestamp scanned_at);

// "alps-hiking.png" -> "alps hiking"
std::string filename_text(const std::filesystem::path& file);

}  // namespace persona
