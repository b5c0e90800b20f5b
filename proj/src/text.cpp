#include "persona/text.h"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>

#include "persona/errors.h"

namespace persona {

namespace {

icu::BreakIterator& word_iterator() {
  // BreakIterator is not thread-safe; one per thread.
  thread_local std::unique_ptr<icu::BreakIterator> iterator = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !it) throw Error("ICU word break iterator unavailable");
    return it;
  }();
  return *iterator;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Case-insensitive search for an ASCII needle.
std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(haystack[i + k])) != needle[k]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

std::string decode_entities(std::string_view text) {
  static const std::pair<std::string_view, std::string_view> kNamed[] = {
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&#39;", "'"}, {"&nbsp;", " "},
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '&') {
      bool replaced = false;
      for (const auto& [entity, value] : kNamed) {
        if (text.substr(i, entity.size()) == entity) {
          out += value;
          i += entity.size();
          replaced = true;
          break;
        }
      }
      if (replaced) continue;
      // &#NNN; and &#xHH;
      if (i + 2 < text.size() && text[i + 1] == '#') {
        const bool hex = text[i + 2] == 'x' || text[i + 2] == 'X';
        const std::size_t digits = i + (hex ? 3 : 2);
        const auto semicolon = text.find(';', digits);
        UChar32 code = 0;
        if (semicolon != std::string_view::npos && semicolon > digits && semicolon - digits <= 8) {
          const auto [end, ec] = std::from_chars(text.data() + digits, text.data() + semicolon, code, hex ? 16 : 10);
          if (ec == std::errc{} && end == text.data() + semicolon && code > 0 && code <= 0x10FFFF) {
            icu::UnicodeString(code).toUTF8String(out);
            i = semicolon + 1;
            continue;
          }
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

// Value of attribute name inside a single tag's text (between '<' and '>').
std::optional<std::string> tag_attribute(std::string_view tag, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = find_ci(tag, name, pos)) != std::string_view::npos) {
    const bool boundary = pos == 0 || std::isspace(static_cast<unsigned char>(tag[pos - 1]));
    std::size_t i = pos + name.size();
    while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
    if (!boundary || i >= tag.size() || tag[i] != '=') {
      pos += name.size();
      continue;
    }
    ++i;
    while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
    if (i >= tag.size()) return std::nullopt;
    if (tag[i] == '"' || tag[i] == '\'') {
      const char quote = tag[i];
      const auto end = tag.find(quote, i + 1);
      if (end == std::string_view::npos) return std::nullopt;
      return std::string(tag.substr(i + 1, end - i - 1));
    }
    const auto end = tag.find_first_of(" \t\r\n/>", i);
    return std::string(tag.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i));
  }
  return std::nullopt;
}

// Like find_ci, but a needle ending in a tag name must be followed by a
// delimiter, so "<head" does not match "<header".
std::size_t find_tag(std::string_view html, std::string_view needle, std::size_t from) {
  const bool named = std::isalpha(static_cast<unsigned char>(needle.back()));
  for (auto pos = find_ci(html, needle, from); pos != std::string_view::npos;
       pos = find_ci(html, needle, pos + 1)) {
    const auto next = pos + needle.size();
    if (!named || next >= html.size()) return pos;
    const char c = html[next];
    if (c == '>' || c == '/' || std::isspace(static_cast<unsigned char>(c))) return pos;
  }
  return std::string_view::npos;
}

// Removes <open ...>...</close> blocks (case-insensitive).
std::string drop_blocks(std::string_view html, std::string_view open, std::string_view close) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto start = find_tag(html, open, pos);
    if (start == std::string_view::npos) break;
    out.append(html.substr(pos, start - pos));
    const auto end = find_tag(html, close, start + open.size());
    if (end == std::string_view::npos) return out;
    const auto tag_end = html.find('>', end);
    pos = tag_end == std::string_view::npos ? html.size() : tag_end + 1;
    out.push_back(' ');
  }
  out.append(html.substr(pos));
  return out;
}

}  // namespace

std::shared_ptr<const StopwordSet> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read stopword list " + path.string());
  auto words = std::make_shared<StopwordSet>();
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    for (auto& token : tokenize_words(line.substr(first, last - first + 1))) words->insert(std::move(token));
  }
  return words;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  if (text.empty()) return words;

  icu::UnicodeString unicode = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  unicode.toLower(icu::Locale::getRoot());

  icu::BreakIterator& it = word_iterator();
  it.setText(unicode);
  int32_t start = it.first();
  for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
    if (it.getRuleStatus() < UBRK_WORD_NONE_LIMIT) continue;
    std::string word;
    unicode.tempSubStringBetween(start, end).toUTF8String(word);
    words.push_back(std::move(word));
  }
  return words;
}

std::size_t codepoint_length(std::string_view utf8) {
  return static_cast<std::size_t>(
      std::count_if(utf8.begin(), utf8.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::vector<std::string> extract_terms(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> terms;
  for (auto& word : tokenize_words(text)) {
    if (codepoint_length(word) < config.min_len) continue;
    if (config.stopwords && config.stopwords->contains(word)) continue;
    terms.push_back(config.stemmer ? config.stemmer(word) : std::move(word));
  }
  return terms;
}

TermFrequencies extract_keywords(std::string_view text, const TokenizerConfig& config) {
  TermFrequencies counts;
  for (auto& term : extract_terms(text, config)) ++counts[std::move(term)];
  return counts;
}

std::string strip_html(std::string_view html) {
  std::string highlighted;

  if (const auto open = find_tag(html, "<title", 0); open != std::string_view::npos) {
    const auto content = html.find('>', open);
    const auto close = content == std::string_view::npos ? content : find_tag(html, "</title", content);
    if (close != std::string_view::npos) {
      highlighted += html.substr(content + 1, close - content - 1);
      highlighted += ' ';
    }
  }
  for (std::size_t pos = 0; (pos = find_tag(html, "<meta", pos)) != std::string_view::npos; ++pos) {
    const auto end = html.find('>', pos);
    if (end == std::string_view::npos) break;
    const std::string_view tag = html.substr(pos + 1, end - pos - 1);
    const auto name = tag_attribute(tag, "name");
    if (name && ascii_lower(*name) == "description") {
      if (const auto content = tag_attribute(tag, "content")) {
        highlighted += *content;
        highlighted += ' ';
      }
    }
  }

  std::string body = drop_blocks(html, "<!--", "-->");
  body = drop_blocks(body, "<head", "</head");
  body = drop_blocks(body, "<title", "</title");
  body = drop_blocks(body, "<script", "</script");
  body = drop_blocks(body, "<style", "</style");

  std::string text;
  text.reserve(body.size());
  bool in_tag = false;
  for (char c : body) {
    if (c == '<') {
      in_tag = true;
      text.push_back(' ');
    } else if (c == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      text.push_back(c);
    }
  }

  std::string out;
  const std::string title = decode_entities(highlighted);
  for (int i = 0; i < kTitleWeight; ++i) out += title;
  out += decode_entities(text);
  return out;
}

}  // namespace persona
