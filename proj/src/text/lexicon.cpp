#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace intentflow::text {

namespace {

using WordSet = std::unordered_set<std::string_view>;
using WordMap = std::unordered_map<std::string_view, std::string_view>;

bool contains(const WordSet& set, std::string_view w) { return set.count(w) != 0; }

constexpr std::string_view kPunct = ",;:.!?()\"'";

bool is_punct_char(char c) { return kPunct.find(c) != std::string_view::npos; }

const WordSet& stopwords() {
  static const WordSet s{
      "a", "an", "the", "this", "that", "these", "those", "some", "any", "each",
      "every", "all", "my", "our", "your", "their", "its", "his", "her",
      "i", "me", "we", "us", "you", "it", "they", "them", "he", "she", "him",
      "is", "are", "was", "were", "be", "been", "being", "am", "do", "does",
      "did", "have", "has", "had", "will", "would", "could", "can", "should",
      "shall", "may", "might", "must",
      "and", "or", "but", "nor", "so", "then", "also", "if", "whether", "when",
      "while", "unless", "there", "here", "not", "no",
      "to", "of", "in", "on", "at", "by", "for", "from", "with", "into", "onto",
      "via", "as", "about", "over", "under", "through", "using", "after",
      "before", "per", "than",
      "please", "kindly", "want", "like", "need", "just", "help", "let", "let's",
      "i'd", "i'm", "we'd", "really", "maybe", "somehow", "thanks", "thank",
      "first", "next", "finally", "lastly", "afterwards", "ok", "okay",
  };
  return s;
}

const WordSet& verbs() {
  static const WordSet s{
      "add", "aggregate", "analyse", "analyze", "annotate", "answer", "append",
      "archive", "assign", "attach", "back", "book", "browse", "buy", "calculate",
      "caption", "categorize", "chart", "check", "classify", "clean", "collect",
      "combine", "compare", "compile", "compose", "compute", "convert", "copy",
      "correct", "count", "create", "crop", "delete", "describe", "detect",
      "determine", "download", "draft", "edit", "email", "examine", "explain",
      "export", "extract", "fetch", "fill", "filter", "find", "format",
      "forward", "gather", "generate", "get", "group", "highlight", "identify",
      "import", "include", "incorporate", "indicate", "insert", "inspect",
      "label", "list", "load", "look", "mail", "make", "mark", "merge",
      "monitor", "move", "notify", "open", "order", "organize", "organise",
      "outline", "paraphrase", "parse", "plot", "post", "predict", "prepare",
      "print", "process", "proofread", "publish", "purchase", "query", "rank",
      "read", "record", "remind", "remove", "rename", "reply", "replace",
      "report", "resize", "review", "rewrite", "run", "save", "scan",
      "schedule", "score", "search", "see", "select", "send", "share",
      "shorten", "sort", "split", "store", "structure", "summarise",
      "summarize", "sync", "tag", "track", "transcribe", "translate", "update",
      "upload", "validate", "verify", "visit", "visualize", "write",
  };
  return s;
}

const WordMap& verb_synonyms() {
  static const WordMap m{
      {"buy", "purchase"},      {"analyse", "analyze"},   {"summarise", "summarize"},
      {"organise", "organize"}, {"mail", "email"},
  };
  return m;
}

const WordMap& irregular_participles() {
  static const WordMap m{
      {"send", "sent"},     {"buy", "bought"},  {"find", "found"},   {"get", "gotten"},
      {"make", "made"},     {"write", "written"}, {"read", "read"},  {"run", "run"},
      {"split", "split"},   {"see", "seen"},    {"draw", "drawn"},   {"build", "built"},
      {"bring", "brought"}, {"choose", "chosen"}, {"show", "shown"}, {"tell", "told"},
      {"sell", "sold"},     {"keep", "kept"},   {"hold", "held"},    {"rewrite", "rewritten"},
      {"put", "put"},       {"set", "set"},     {"do", "done"},      {"take", "taken"},
  };
  return m;
}

const WordSet& doubling_verbs() {
  static const WordSet s{"scan", "plan", "stop", "drop", "tag", "map", "ship", "shop", "chat", "plot"};
  return s;
}

const WordMap& nominalizations() {
  static const WordMap m{
      {"analyze", "analysis"},      {"summarize", "summary"},     {"translate", "translation"},
      {"detect", "detection"},      {"classify", "classification"}, {"inspect", "inspection"},
      {"examine", "examination"},   {"extract", "extraction"},    {"process", "processing"},
      {"verify", "verification"},   {"validate", "validation"},   {"identify", "identification"},
      {"compare", "comparison"},    {"collect", "collection"},    {"convert", "conversion"},
      {"organize", "organization"}, {"transcribe", "transcription"}, {"generate", "generation"},
      {"purchase", "purchase"},     {"review", "review"},         {"check", "check"},
  };
  return m;
}

const WordMap& irregular_plurals() {
  static const WordMap m{
      {"people", "person"}, {"children", "child"}, {"men", "man"},   {"women", "woman"},
      {"data", "data"},     {"media", "media"},    {"minutes", "minutes"}, {"news", "news"},
      {"analyses", "analysis"}, {"series", "series"}, {"status", "status"},
  };
  return m;
}

const WordSet& determiners() {
  static const WordSet s{"a", "an", "the", "this", "that", "these", "those", "some",
                         "any", "each", "every", "all", "my", "our", "your",
                         "their", "its", "his", "her"};
  return s;
}

const WordSet& definites() {
  static const WordSet s{"the", "those", "these", "that", "this", "its", "their"};
  return s;
}

const WordSet& prepositions() {
  static const WordSet s{"from", "into", "to", "on", "in", "via", "with", "by",
                         "for", "as", "using", "of", "at", "onto", "through",
                         "about", "under", "over", "per", "toward", "towards"};
  return s;
}

const WordSet& data_prepositions() {
  static const WordSet s{"from", "for", "on", "using", "with"};
  return s;
}

const WordSet& input_nouns() {
  static const WordSet s{
      "url",      "urls",     "link",       "links",     "file",     "files",
      "content",  "contents", "document",   "documents", "paper",    "papers",
      "spreadsheet", "spreadsheets", "sheet", "table",   "tables",   "data",
      "dataset",  "database", "image",      "images",    "photo",    "photos",
      "video",    "videos",   "audio",      "recording", "recordings", "text",
      "address",  "title",    "name",       "engine",    "platform", "language",
      "recipient", "recipients", "folder",  "directory", "attachment", "transcript",
      "csv",      "pdf",      "xlsx",       "list",
  };
  return s;
}

const WordMap& gazetteer_table() {
  static const WordMap m{
      {"google", "search engine"},     {"bing", "search engine"},
      {"duckduckgo", "search engine"}, {"naver", "search engine"},
      {"yahoo", "search engine"},      {"amazon", "purchase platform"},
      {"ebay", "purchase platform"},   {"coupang", "purchase platform"},
      {"etsy", "purchase platform"},   {"gmail", "email service"},
      {"outlook", "email service"},    {"slack", "messaging service"},
      {"dropbox", "storage service"},
  };
  return m;
}

const WordMap& identifier_attributes() {
  static const WordMap m{
      {"book", "title"},    {"song", "title"},  {"movie", "title"},  {"film", "title"},
      {"article", "title"}, {"album", "title"}, {"paper", "title"},  {"video", "title"},
      {"person", "name"},   {"product", "name"}, {"company", "name"}, {"city", "name"},
      {"restaurant", "name"}, {"hotel", "name"}, {"file", "name"},
  };
  return m;
}

}  // namespace

std::string Token::lower() const { return to_lower(text); }

bool Token::is(std::string_view lowered) const { return !punct && to_lower(text) == lowered; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    std::vector<Token> trailing;
    std::size_t b = 0, e = chunk.size();
    while (b < e && is_punct_char(chunk[b])) out.push_back({std::string(1, chunk[b++]), true});
    while (e > b && is_punct_char(chunk[e - 1])) trailing.push_back({std::string(1, chunk[--e]), true});
    if (e > b) out.push_back({std::string(chunk.substr(b, e - b)), false});
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.push_back(*it);
    i = j;
  }
  return out;
}

std::string join(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  bool no_space_next = false;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    const bool closing = t.punct && std::string_view(",;:.!?)").find(t.text[0]) != std::string_view::npos;
    if (!out.empty() && !closing && !no_space_next) out += ' ';
    out += t.text;
    no_space_next = t.punct && t.text == "(";
  }
  return out;
}

std::string join(const std::vector<Token>& tokens) { return join(tokens, 0, tokens.size()); }

bool is_stopword(std::string_view lower) { return contains(stopwords(), lower); }

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text)) {
    if (t.punct) continue;
    auto l = t.lower();
    if (!is_stopword(l)) out.push_back(std::move(l));
  }
  return out;
}

bool is_verb(std::string_view lower) { return contains(verbs(), lower); }

std::string canonical_verb(std::string_view lower) {
  auto it = verb_synonyms().find(lower);
  return std::string(it == verb_synonyms().end() ? lower : it->second);
}

std::string past_participle(std::string_view lower) {
  if (auto it = irregular_participles().find(lower); it != irregular_participles().end()) {
    return std::string(it->second);
  }
  std::string v(lower);
  if (v.empty()) return v;
  if (v.back() == 'e') return v + "d";
  if (v.size() > 1 && v.back() == 'y' &&
      std::string_view("aeiou").find(v[v.size() - 2]) == std::string_view::npos) {
    return v.substr(0, v.size() - 1) + "ied";
  }
  if (contains(doubling_verbs(), lower)) return v + v.back() + "ed";
  return v + "ed";
}

std::string nominalize(std::string_view lower) {
  auto it = nominalizations().find(lower);
  return std::string(it == nominalizations().end() ? lower : it->second);
}

std::string singularize(std::string_view lower) {
  if (auto it = irregular_plurals().find(lower); it != irregular_plurals().end()) {
    return std::string(it->second);
  }
  std::string w(lower);
  auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("sses") || ends("shes") || ends("ches") || ends("xes")) return w.substr(0, w.size() - 2);
  if (ends("ss") || ends("us") || ends("is")) return w;
  if (ends("s")) return w.substr(0, w.size() - 1);
  return w;
}

bool is_plural(std::string_view lower) {
  if (lower == "people" || lower == "children" || lower == "men" || lower == "women") return true;
  return singularize(lower) != lower;
}

bool is_determiner(std::string_view lower) { return contains(determiners(), lower); }
bool is_definite(std::string_view lower) { return contains(definites(), lower); }

bool is_object_pronoun(std::string_view lower) {
  return lower == "it" || lower == "them" || lower == "this" || lower == "these" ||
         lower == "that" || lower == "those";
}

bool is_preposition(std::string_view lower) { return contains(prepositions(), lower); }
bool is_data_preposition(std::string_view lower) { return contains(data_prepositions(), lower); }

bool is_subordinator(std::string_view lower) {
  return lower == "if" || lower == "whether" || lower == "when" || lower == "unless" ||
         lower == "where" || lower == "because";
}

bool is_input_noun(std::string_view lower) { return contains(input_nouns(), lower); }

bool is_collection_marker(std::string_view lower) {
  return lower == "list" || lower == "set" || lower == "collection" || lower == "batch";
}

bool is_web_location(std::string_view lower) {
  return lower == "website" || lower == "site" || lower == "webpage" || lower == "homepage";
}

bool is_result_noun(std::string_view lower) {
  return lower == "results" || lower == "result" || lower == "output" || lower == "outputs" ||
         lower == "findings";
}

bool is_conditional_verb(std::string_view lower) {
  return lower == "check" || lower == "verify" || lower == "determine" || lower == "see" ||
         lower == "detect" || lower == "inspect" || lower == "examine";
}

bool is_proper_noun(std::string_view word) {
  if (word.size() < 2 || !std::isupper(static_cast<unsigned char>(word[0]))) return false;
  return std::any_of(word.begin() + 1, word.end(),
                     [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

bool is_literal_marker(std::string_view word) {
  if (word.size() == 1) return std::isalnum(static_cast<unsigned char>(word[0])) && !std::islower(static_cast<unsigned char>(word[0]));
  return word.size() >= 2 && (word.front() == '"' || word.front() == '\'');
}

std::optional<std::string> gazetteer(std::string_view lower) {
  auto it = gazetteer_table().find(lower);
  if (it == gazetteer_table().end()) return std::nullopt;
  return std::string(it->second);
}

std::string identifier_attribute(std::string_view lower) {
  auto it = identifier_attributes().find(singularize(lower));
  return std::string(it == identifier_attributes().end() ? "name" : it->second);
}

bool has_identifier_attribute(std::string_view lower) {
  return identifier_attributes().count(singularize(lower)) != 0;
}

std::optional<VerbArgument> implied_argument(std::string_view verb_lower) {
  if (verb_lower == "search") return VerbArgument{"on", "search engine", {"on", "using", "via", "at", "in"}};
  if (verb_lower == "purchase" || verb_lower == "order") {
    return VerbArgument{"on", "purchase platform", {"on", "using", "via", "at", "from"}};
  }
  return std::nullopt;
}

std::optional<VerbArgument> expansion_argument(std::string_view verb_lower) {
  if (verb_lower == "translate") return VerbArgument{"into", "target language", {"to", "into", "in"}};
  if (verb_lower == "send" || verb_lower == "email" || verb_lower == "forward") {
    return VerbArgument{"to", "recipient", {"to"}};
  }
  if (verb_lower == "search") return VerbArgument{"for", "search query", {"for"}};
  if (verb_lower == "summarize") return VerbArgument{"from", "source content", {"from", "of"}};
  return std::nullopt;
}

const std::vector<std::vector<std::string>>& lead_in_phrases() {
  static const std::vector<std::vector<std::string>> phrases = [] {
    std::vector<std::vector<std::string>> p{
        {"i", "want", "you", "to"}, {"i", "would", "like", "to"}, {"we", "would", "like", "to"},
        {"i", "want", "to"},        {"we", "want", "to"},         {"i'd", "like", "to"},
        {"i", "need", "to"},        {"we", "need", "to"},         {"can", "you"},
        {"could", "you"},           {"would", "you"},             {"will", "you"},
        {"help", "me"},             {"let", "us"},                {"after", "that"},
        {"and", "then"},            {"please"},                   {"kindly"},
        {"let's"},                  {"and"},                      {"then"},
        {"also"},                   {"finally"},                  {"first"},
        {"next"},                   {"afterwards"},               {"lastly"},
        {"so"},
    };
    std::stable_sort(p.begin(), p.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return p;
  }();
  return phrases;
}

}  // namespace intentflow::text
