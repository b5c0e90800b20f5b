#include "persona/text.h"

namespace persona {

std::shared_ptr<const StopwordSet> default_stopwords() {
  static const auto words = std::make_shared<const StopwordSet>(StopwordSet{
    "a", "about", "above", "across", "after", "again", "against", "all", "along", "also", "am",
    "among", "an", "and", "any", "are", "aren't", "around", "as", "at", "be", "because", "been",
    "before", "being", "below", "between", "both", "but", "by", "can", "can't", "cannot", "com",
    "could", "couldn't", "did", "didn't", "do", "does", "doesn't", "doing", "don't", "down",
    "during", "each", "few", "for", "from", "further", "get", "got", "had", "hadn't", "has",
    "hasn't", "have", "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here", "here's",
    "hers", "herself", "him", "himself", "his", "how", "how's", "htm", "html", "http", "https", "i",
    "i'd", "i'll", "i'm", "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself",
    "just", "let's", "like", "may", "me", "might", "more", "most", "must", "mustn't", "my",
    "myself", "net", "new", "no", "nor", "not", "of", "off", "on", "once", "one", "only", "or",
    "org", "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "per", "said",
    "same", "says", "shall", "shan't", "she", "she'd", "she'll", "she's", "should", "shouldn't",
    "so", "some", "such", "than", "that", "that's", "the", "their", "theirs", "them", "themselves",
    "then", "there", "there's", "these", "they", "they'd", "they'll", "they're", "they've", "this",
    "those", "through", "to", "too", "two", "under", "until", "up", "upon", "use", "used", "using",
    "very", "via", "was", "wasn't", "we", "we'd", "we'll", "we're", "we've", "were", "weren't",
    "what", "what's", "when", "when's", "where", "where's", "which", "while", "who", "who's",
    "whom", "why", "why's", "will", "with", "within", "without", "won't", "would", "wouldn't",
    "www", "you", "you'd", "you'll", "you're", "you've", "your", "yours", "yourself", "yourselves",
  });
  return words;
}

}  // namespace persona
