#include "intentflow/text/clauses.hpp"

namespace intentflow::text {

namespace {

bool starts_lead_in(const TokenList& t, std::size_t i) {
  if (i >= t.size() || t[i].punct) return false;
  const std::string w = t[i].lower();
  return w == "i" || w == "we" || w == "please" || w == "also" || w == "then" || w == "finally";
}

bool word_at(const TokenList& t, std::size_t i, std::string_view lower) {
  return i < t.size() && t[i].is(lower);
}

bool verb_at(const TokenList& t, std::size_t i) {
  return i < t.size() && !t[i].punct && is_verb(t[i].lower());
}

bool has_word(const TokenList& t) {
  for (const auto& tok : t) {
    if (!tok.punct) return true;
  }
  return false;
}

}  // namespace

std::vector<TokenList> split_clauses(const TokenList& tokens) {
  std::vector<TokenList> out;
  TokenList current;
  auto flush = [&] {
    current = strip_trailing_punct(std::move(current));
    if (has_word(current)) out.push_back(std::move(current));
    current.clear();
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.punct && (t.text == ";" || t.text == "." || t.text == "!" || t.text == "?")) {
      flush();
      continue;
    }
    if (t.punct && t.text == ",") {
      const bool and_then = word_at(tokens, i + 1, "and") && word_at(tokens, i + 2, "then");
      const bool then = word_at(tokens, i + 1, "then");
      const bool and_clause = word_at(tokens, i + 1, "and") &&
                              (verb_at(tokens, i + 2) || starts_lead_in(tokens, i + 2));
      if (and_then || then || and_clause || verb_at(tokens, i + 1)) {
        flush();
        continue;
      }
    }
    if (!t.punct && t.is("and") && word_at(tokens, i + 1, "then")) {
      flush();
    }
    current.push_back(t);
  }
  flush();
  return out;
}

std::vector<std::string> segment_clauses(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& c : split_clauses(tokenize(text))) out.push_back(join(c));
  return out;
}

TokenList strip_lead_ins(TokenList tokens) {
  bool changed = true;
  while (changed) {
    changed = false;
    while (!tokens.empty() && tokens.front().punct) {
      tokens.erase(tokens.begin());
      changed = true;
    }
    for (const auto& phrase : lead_in_phrases()) {
      if (tokens.size() < phrase.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < phrase.size() && match; ++k) {
        match = tokens[k].is(phrase[k]);
      }
      // Keep a lone connective that is the whole clause ("Next").
      if (match && tokens.size() > phrase.size()) {
        tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(phrase.size()));
        changed = true;
        break;
      }
    }
  }
  return tokens;
}

TokenList strip_politeness(TokenList tokens) {
  TokenList out;
  for (auto& t : tokens) {
    if (t.is("please") || t.is("kindly")) continue;
    out.push_back(std::move(t));
  }
  return out;
}

TokenList strip_trailing_punct(TokenList tokens) {
  while (!tokens.empty() && tokens.back().punct && tokens.back().text != ")") tokens.pop_back();
  while (!tokens.empty() && tokens.front().punct && tokens.front().text != "(" &&
         tokens.front().text != "\"" && tokens.front().text != "'") {
    tokens.erase(tokens.begin());
  }
  return tokens;
}

}  // namespace intentflow::text
