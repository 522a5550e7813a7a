#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Small English lexicon and tokenizer behind the rule-based agents.
/// Everything here is deterministic and table driven.
namespace intentflow::text {

struct Token {
  std::string text;
  bool punct = false;

  std::string lower() const;
  bool is(std::string_view lowered) const;
};

/// Splits on whitespace, then peels leading/trailing punctuation
/// (, ; : . ! ? ( ) " ') off each chunk into separate tokens. Punctuation
/// inside a chunk ("image_link.xlsx", "O/X") stays in the word.
std::vector<Token> tokenize(std::string_view text);

/// Inverse of tokenize up to whitespace: words separated by one space,
/// closing punctuation attached to the previous word.
std::string join(const std::vector<Token>& tokens);
std::string join(const std::vector<Token>& tokens, std::size_t begin, std::size_t end);

std::string to_lower(std::string_view s);
std::string capitalize(std::string_view s);
std::string trim(std::string_view s);
/// Trims and collapses internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

bool is_stopword(std::string_view lower);
/// Lower-cased non-punctuation tokens that are not stopwords.
std::vector<std::string> content_tokens(std::string_view text);

bool is_verb(std::string_view lower);
/// Synonym folding for imperative heads (buy -> purchase).
std::string canonical_verb(std::string_view lower);
std::string past_participle(std::string_view lower);
/// Noun form of a verb used in phrases like "the image review".
std::string nominalize(std::string_view lower);
std::string singularize(std::string_view lower);
bool is_plural(std::string_view lower);

bool is_determiner(std::string_view lower);
/// the / those / these / that / this / its / their.
bool is_definite(std::string_view lower);
bool is_object_pronoun(std::string_view lower);
bool is_preposition(std::string_view lower);
/// Prepositions whose object is an input the step needs (from, for, on, ...).
bool is_data_preposition(std::string_view lower);
bool is_subordinator(std::string_view lower);
/// Nouns naming something a user supplies (URL, file, content, ...).
bool is_input_noun(std::string_view lower);
bool is_collection_marker(std::string_view lower);
bool is_web_location(std::string_view lower);
/// "results", "output" and friends: anaphora to the previous step.
bool is_result_noun(std::string_view lower);
/// Verbs taking an "if/whether" complement (check, verify, ...).
bool is_conditional_verb(std::string_view lower);
/// "Google" style proper noun: upper-case initial followed by lower case.
bool is_proper_noun(std::string_view word);
/// Single letters, digits or quoted symbols used as literal markers ("O").
bool is_literal_marker(std::string_view word);

/// Category of a known named service ("Google" -> "search engine").
std::optional<std::string> gazetteer(std::string_view lower);
/// Identifying attribute of an entity noun ("book" -> "title"); "name"
/// for nouns outside the table.
std::string identifier_attribute(std::string_view lower);
bool has_identifier_attribute(std::string_view lower);

/// An argument a verb needs, introduced by `preposition`.
struct VerbArgument {
  std::string preposition;
  std::string label;
  /// Prepositions whose presence means the argument is already given.
  std::vector<std::string> satisfied_by;
};

/// Arguments the planner inserts when missing (search -> on search engine).
std::optional<VerbArgument> implied_argument(std::string_view verb_lower);
/// Arguments query expansion asks for (translate -> target language).
std::optional<VerbArgument> expansion_argument(std::string_view verb_lower);

/// Multi-word politeness and lead-in phrases, lower-cased, longest first.
const std::vector<std::vector<std::string>>& lead_in_phrases();

}  // namespace intentflow::text
