#pragma once

#include "intentflow/text/lexicon.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace intentflow::text {

using TokenList = std::vector<Token>;

/// Splits a request into clauses. Boundaries: ";", sentence-final
/// punctuation, "and then", ", then", ", and" when a verb or lead-in
/// follows, and a comma directly followed by an imperative verb. The
/// separator punctuation is dropped; connective words stay at the front of
/// the following clause for strip_lead_ins.
std::vector<TokenList> split_clauses(const TokenList& tokens);

/// Joined clause texts of split_clauses(tokenize(text)).
std::vector<std::string> segment_clauses(std::string_view text);

/// Removes politeness markers and connectives from the front of a clause
/// ("I want to", "please", "and then", ...), repeatedly.
TokenList strip_lead_ins(TokenList tokens);

/// Removes any "please"/"kindly" anywhere in the clause.
TokenList strip_politeness(TokenList tokens);

TokenList strip_trailing_punct(TokenList tokens);

}  // namespace intentflow::text
