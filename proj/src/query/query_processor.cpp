#include "intentflow/query/query_processor.hpp"

#include "intentflow/error.hpp"
#include "intentflow/text/clauses.hpp"

#include <algorithm>

namespace intentflow::query {

using nlohmann::json;
namespace tx = intentflow::text;

std::string_view to_string(Option o) {
  switch (o) {
    case Option::reformulation: return "reformulation";
    case Option::expansion: return "expansion";
    case Option::decomposition: return "decomposition";
  }
  return "reformulation";
}

std::optional<Option> parse_option(std::string_view s) {
  if (s == "reformulation") return Option::reformulation;
  if (s == "expansion") return Option::expansion;
  if (s == "decomposition") return Option::decomposition;
  return std::nullopt;
}

json to_json(const RefinedQuery& q) {
  return json{{"text", q.text},
              {"option_applied", std::string(to_string(q.option_applied))},
              {"clauses", q.clauses}};
}

RefinedQuery refined_query_from_json(const json& j) {
  RefinedQuery q;
  q.text = j.at("text").get<std::string>();
  auto opt = parse_option(j.at("option_applied").get<std::string>());
  if (!opt) throw Error(ErrorCode::parse_error, "unknown query option");
  q.option_applied = *opt;
  q.clauses = j.at("clauses").get<std::vector<std::string>>();
  return q;
}

namespace {

void require_text(const RawQuery& q) {
  if (tx::trim(q.text).empty()) throw Error(ErrorCode::bad_request, "query text is empty");
}

/// Lead-ins and politeness markers removed, whitespace collapsed, first
/// letter capitalized.
std::string normalize_single(const std::string& text) {
  auto tokens = tx::strip_politeness(tx::strip_lead_ins(tx::tokenize(tx::collapse_whitespace(text))));
  return tx::capitalize(tx::join(tokens));
}

void require_content(const std::string& text, const RawQuery& q) {
  if (tx::content_tokens(text).empty()) {
    throw Error(ErrorCode::empty_query, "query contains only filler words: \"" + q.text + "\"");
  }
}

}  // namespace

Option select_option(const RawQuery& q) {
  require_text(q);
  const auto clauses = tx::split_clauses(tx::tokenize(q.text));
  const std::size_t boundaries = clauses.empty() ? 0 : clauses.size() - 1;
  if (boundaries >= 2) return Option::decomposition;
  if (clauses.size() <= 1 && tx::content_tokens(q.text).size() < 4) return Option::expansion;
  return Option::reformulation;
}

std::vector<std::string> expansion_slots(std::string_view clause) {
  std::vector<std::string> slots;
  const auto tokens = tx::strip_lead_ins(tx::tokenize(clause));
  if (tokens.empty() || tokens.front().punct) return slots;

  const std::string verb = tx::canonical_verb(tokens.front().lower());
  if (tx::is_verb(tokens.front().lower())) {
    if (auto arg = tx::expansion_argument(verb)) {
      const bool given = std::any_of(tokens.begin() + 1, tokens.end(), [&](const tx::Token& t) {
        return std::find(arg->satisfied_by.begin(), arg->satisfied_by.end(), t.lower()) !=
               arg->satisfied_by.end();
      });
      if (!given) slots.push_back(arg->label);
    }
  }
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (!(tokens[i].is("a") || tokens[i].is("an"))) continue;
    const std::string noun = tokens[i + 1].lower();
    if (tx::has_identifier_attribute(noun)) {
      slots.push_back(tx::singularize(noun) + " " + tx::identifier_attribute(noun));
    }
  }
  return slots;
}

RefinedQuery rule_based_process(const RawQuery& q, Option option) {
  require_text(q);
  RefinedQuery out;
  out.option_applied = option;

  if (option == Option::decomposition) {
    for (auto& clause : tx::split_clauses(tx::tokenize(q.text))) {
      auto cleaned = tx::strip_trailing_punct(tx::strip_politeness(tx::strip_lead_ins(std::move(clause))));
      std::string text = tx::join(cleaned);
      if (!tx::content_tokens(text).empty()) out.clauses.push_back(std::move(text));
    }
    if (out.clauses.size() >= 2) {
      out.text.clear();
      for (std::size_t i = 0; i < out.clauses.size(); ++i) {
        if (i) out.text += "; ";
        out.text += out.clauses[i];
      }
      return out;
    }
    // Nothing to decompose: fall back to a single normalized clause.
    out.option_applied = Option::reformulation;
    out.clauses.clear();
  }

  std::string text = normalize_single(q.text);
  require_content(text, q);
  if (out.option_applied == Option::expansion) {
    for (const auto& slot : expansion_slots(text)) {
      const std::string marker = "(" + slot + "?)";
      if (text.find(marker) == std::string::npos) text += " " + marker;
    }
  }
  out.text = text;
  out.clauses = {text};
  return out;
}

std::string_view query_instruction() {
  return "You are the query processing agent of a workflow builder. Given a user's "
         "request, choose one operation: reformulation (normalize one clause), expansion "
         "(append clarifying slots such as \"(target language?)\"), or decomposition "
         "(split into ordered imperative clauses). If an option is supplied, apply it. "
         "Answer with JSON {\"option\": ..., \"text\": ..., \"clauses\": [...]}.";
}

json rule_based_respond(const json& payload) {
  RawQuery q{payload.value("text", std::string{}), std::nullopt};
  try {
    Option option = select_option(q);
    if (payload.contains("option") && payload["option"].is_string()) {
      if (auto o = parse_option(payload["option"].get<std::string>())) option = *o;
    }
    RefinedQuery r = rule_based_process(q, option);
    return json{{"option", std::string(to_string(r.option_applied))},
                {"text", r.text},
                {"clauses", r.clauses}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::empty_query) throw;
    return json{{"error", "empty_query"}, {"message", e.what()}};
  }
}

RefinedQuery QueryProcessor::process(const RawQuery& q, std::optional<Option> option) const {
  require_text(q);
  agents::AgentRequest req;
  req.role = agents::Role::query_processor;
  req.instruction = std::string(query_instruction());
  req.payload = json{{"text", q.text},
                     {"option", option ? json(std::string(to_string(*option))) : json(nullptr)}};
  if (q.locale) req.payload["locale"] = *q.locale;
  const auto resp = gateway_.invoke(req);
  const json& c = resp.content;
  if (c.contains("error")) throw Error(ErrorCode::empty_query, c["message"].get<std::string>());
  RefinedQuery out;
  out.option_applied = *parse_option(c["option"].get<std::string>());
  out.text = c["text"].get<std::string>();
  out.clauses = c["clauses"].get<std::vector<std::string>>();
  return out;
}

}  // namespace intentflow::query
