#include <gtest/gtest.h>

#include <cctype>

#include "persona/text.h"
#include "test_support.h"

namespace persona {
namespace {

TokenizerConfig with_stopwords(std::initializer_list<const char*> words) {
  TokenizerConfig config;
  auto set = std::make_shared<StopwordSet>();
  for (const char* w : words) set->insert(w);
  config.stopwords = set;
  return config;
}

TEST(ExtractKeywords, StopwordsAndCaseFolding) {
  EXPECT_EQ(extract_keywords("The quick fox, the FOX!", with_stopwords({"the"})),
            (TermFrequencies{{"quick", 1}, {"fox", 2}}));
}

TEST(ExtractKeywords, EmptyText) { EXPECT_TRUE(extract_keywords("", TokenizerConfig{}).empty()); }

TEST(ExtractKeywords, MinLengthCountsCodePoints) {
  const auto config = with_stopwords({});
  EXPECT_EQ(extract_keywords("ab été go über", config), (TermFrequencies{{"été", 1}, {"über", 1}}));
  auto longer = config;
  longer.min_len = 4;
  EXPECT_EQ(extract_keywords("ab été go über", longer), (TermFrequencies{{"über", 1}}));
}

TEST(ExtractKeywords, UnicodeLowercasing) {
  EXPECT_EQ(extract_keywords("ÉTÉ Été été", with_stopwords({})), (TermFrequencies{{"été", 3}}));
}

TEST(ExtractKeywords, StemmerHook) {
  auto config = with_stopwords({});
  config.stemmer = [](std::string_view w) {
    std::string s(w);
    if (s.size() > 4 && s.ends_with('s')) s.pop_back();
    return s;
  };
  EXPECT_EQ(extract_keywords("kernels kernel", config), (TermFrequencies{{"kernel", 2}}));
}

TEST(ExtractKeywords, DefaultStopwordsDropFunctionWords) {
  EXPECT_GE(default_stopwords()->size(), 200u);
  const auto kw = extract_keywords("This is the Linux Journal and it is about the kernel", TokenizerConfig{});
  EXPECT_EQ(kw, (TermFrequencies{{"journal", 1}, {"kernel", 1}, {"linux", 1}}));
}

TEST(ExtractKeywords, FiveHundredWordFixtureMatchesRecount) {
  const std::string text = testing::read_file(testing::data_dir() / "extraction_500.txt");
  const TokenizerConfig config;

  // Oracle: one pass over ASCII, a word is a maximal alphanumeric run.
  TermFrequencies expected;
  std::size_t words = 0;
  std::string current;
  const auto flush = [&] {
    if (current.empty()) return;
    ++words;
    if (current.size() >= 3 && !config.stopwords->contains(current)) ++expected[current];
    current.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  ASSERT_EQ(words, 500u);
  EXPECT_EQ(extract_keywords(text, config), expected);
}

TEST(ExtractKeywords, RandomTextProperties) {
  testing::Rng rng(17);
  const TokenizerConfig config;
  const std::vector<std::string> pieces = {"the", "and", "an", "of", "x", "linux", "Kernel", "heap", "été",
                                           "zq", "journal", "data", ",", ".", "!", "  ", "\n", "-"};
  for (int round = 0; round < 300; ++round) {
    std::string text;
    const auto n = testing::uniform_int(rng, 0, 60);
    for (std::int64_t i = 0; i < n; ++i) {
      text += pieces[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<std::int64_t>(pieces.size()) - 1))];
      if (testing::uniform_int(rng, 0, 1)) text += ' ';
    }
    const auto kw = extract_keywords(text, config);
    std::int64_t total = 0;
    for (const auto& [term, f] : kw) {
      total += f;
      EXPECT_GE(codepoint_length(term), config.min_len);
      EXPECT_FALSE(config.stopwords->contains(term));
      EXPECT_GE(f, 1);
    }
    EXPECT_LE(static_cast<std::size_t>(total), tokenize_words(text).size());
  }
}

TEST(Tokenize, DropsPunctuationKeepsNumbers) {
  EXPECT_EQ(tokenize_words("Hello, World! 2024 x86-64"),
            (std::vector<std::string>{"hello", "world", "2024", "x86", "64"}));
  EXPECT_EQ(codepoint_length("été"), 3u);
}

TEST(Stopwords, LoadFromFile) {
  testing::TempDir dir;
  testing::write_file(dir / "stop.txt", "# comment\nfoo\n\n  Bar \n");
  const auto set = load_stopwords(dir / "stop.txt");
  EXPECT_EQ(*set, (StopwordSet{"foo", "bar"}));
}

TEST(StripHtml, TitleAndDescriptionWeighted) {
  const std::string html =
      "<html><head><title>Linux Journal</title>"
      "<meta name=\"description\" content=\"kernel news\"><style>p{color:red}</style></head>"
      "<body><!-- hidden --><p>Body &amp; text</p><script>var secret = 1;</script></body></html>";
  const auto kw = extract_keywords(strip_html(html), with_stopwords({}));
  EXPECT_EQ(kw, (TermFrequencies{{"body", 1}, {"journal", 3}, {"kernel", 3}, {"linux", 3}, {"news", 3}, {"text", 1}}));
}

TEST(StripHtml, HeaderTagIsNotHead) {
  const auto text = strip_html("<body><header>Site Header</header><p>Content</p></body>");
  EXPECT_NE(text.find("Site Header"), std::string::npos);
  EXPECT_NE(text.find("Content"), std::string::npos);
}

TEST(StripHtml, UppercaseTagsAndEntities) {
  const auto text = strip_html("<HTML><SCRIPT>bad()</SCRIPT><P>caf&#233; &lt;ok&gt; &#65;&#x42;</P></HTML>");
  EXPECT_EQ(text.find("bad"), std::string::npos);
  EXPECT_NE(text.find("café <ok> AB"), std::string::npos);
}

}  // namespace
}  // namespace persona
