#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace persona {

struct ParsedUrl {
  std::string scheme;  // lowercased
  std::string host;    // lowercased, without port
  std::string path;
  std::string query;   // without '?'
};

// Accepts absolute URLs of the form scheme://host[:port][/path][?query][#fragment].
std::optional<ParsedUrl> parse_url(std::string_view url);
inline bool is_valid_url(std::string_view url) { return parse_url(url).has_value(); }

// %XX decoding; '+' becomes a space when plus_as_space is set. Bad escapes are kept verbatim.
std::string percent_decode(std::string_view text, bool plus_as_space);
std::string percent_encode(std::string_view text);

// Splits "a=1&b=2" into decoded pairs, in order.
std::vector<std::pair<std::string, std::string>> parse_query(std::string_view query);

}  // namespace persona
