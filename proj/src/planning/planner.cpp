#include "intentflow/planning/planner.hpp"

#include "intentflow/error.hpp"

#include <algorithm>
#include <regex>

namespace intentflow::planning {

using nlohmann::json;
namespace tx = intentflow::text;
using tx::Token;
using tx::TokenList;

namespace {

Token word(std::string w) { return Token{std::move(w), false}; }

bool is_boundary(const Token& t) {
  if (t.punct) return true;
  const auto l = t.lower();
  return tx::is_preposition(l) || tx::is_subordinator(l);
}

void insert_words(TokenList& tokens, std::size_t at, std::string_view phrase) {
  std::vector<Token> words;
  for (auto& t : tx::tokenize(phrase)) words.push_back(std::move(t));
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), words.begin(), words.end());
}

// "a specific book" -> "book title"
void name_unspecified_entities(TokenList& t) {
  for (std::size_t i = 0; i + 2 < t.size(); ++i) {
    const bool article = t[i].is("a") || t[i].is("an") || t[i].is("some");
    const bool vague = t[i + 1].is("specific") || t[i + 1].is("certain") || t[i + 1].is("particular");
    if (!article || !vague || t[i + 2].punct) continue;
    const std::string noun = t[i + 2].text;
    const std::string attr = tx::identifier_attribute(tx::to_lower(noun));
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(i), t.begin() + static_cast<std::ptrdiff_t>(i + 3));
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(i), {word(noun), word(attr)});
  }
}

// "on Google" -> "on search engine Google"
void categorize_named_services(TokenList& t) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t[i].punct || !tx::is_preposition(t[i].lower()) || t[i + 1].punct) continue;
    auto category = tx::gazetteer(t[i + 1].lower());
    if (!category) continue;
    insert_words(t, i + 1, *category);
    i += 2;
  }
}

void add_implied_argument(TokenList& t, const std::string& verb) {
  auto arg = tx::implied_argument(verb);
  if (!arg) return;
  const bool given = std::any_of(t.begin() + 1, t.end(), [&](const Token& tok) {
    return std::find(arg->satisfied_by.begin(), arg->satisfied_by.end(), tok.lower()) !=
           arg->satisfied_by.end();
  });
  if (!given) insert_words(t, t.size(), arg->preposition + " " + arg->label);
}

// "from the website" -> "from website URL"
void locate_web_sources(TokenList& t) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(t[i].is("from") || t[i].is("on") || t[i].is("at"))) continue;
    std::size_t j = i + 1;
    if (tx::is_determiner(t[j].lower()) && j + 1 < t.size()) ++j;
    if (t[j].punct || !tx::is_web_location(t[j].lower())) continue;
    if (j + 1 < t.size()) {
      const auto next = t[j + 1].lower();
      if (next == "url" || next == "urls" || next == "link" || next == "address") continue;
    }
    const Token noun = t[j];
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(i + 1), t.begin() + static_cast<std::ptrdiff_t>(j + 1));
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(i + 1), {noun, word("URL")});
  }
}

// "check if there are people in those images" ->
// "check the reviewed images if there are people present in them"
void front_anaphoric_object(TokenList& t, const std::string& verb, const RewriteContext& ctx) {
  if (!ctx.previous || ctx.previous->object_head.empty() || ctx.previous->verb.empty()) return;
  if (!tx::is_conditional_verb(verb) || t.size() < 6) return;
  if (!(t[1].is("if") || t[1].is("whether"))) return;
  const std::size_t n = t.size();
  const Token& prep = t[n - 3];
  const Token& dem = t[n - 2];
  const Token& noun = t[n - 1];
  if (prep.punct || !tx::is_preposition(prep.lower())) return;
  if (!(dem.is("those") || dem.is("these") || dem.is("the") || dem.is("such"))) return;
  if (noun.punct || tx::singularize(noun.lower()) != tx::singularize(ctx.previous->object_head)) return;

  TokenList cond(t.begin() + 2, t.end() - 3);
  const bool existential = cond.size() >= 2 && cond[0].is("there") &&
                           (cond[1].is("is") || cond[1].is("are"));
  const bool has_present = std::any_of(cond.begin(), cond.end(), [](const Token& x) { return x.is("present"); });

  TokenList out{t[0], word("the"), word(tx::past_participle(ctx.previous->verb)), noun, t[1]};
  out.insert(out.end(), cond.begin(), cond.end());
  if (existential && !has_present) out.push_back(word("present"));
  out.push_back(prep);
  out.push_back(word(tx::is_plural(noun.lower()) ? "them" : "it"));
  t = std::move(out);
}

// "download the results" -> "download the results of the image review"
void qualify_results(TokenList& t, const RewriteContext& ctx) {
  if (ctx.position == 0 || !ctx.first || ctx.first->verb.empty() || ctx.first->object_head.empty()) return;
  if (t.size() != 3 || !tx::is_definite(t[1].lower()) || !tx::is_result_noun(t[2].lower())) return;
  insert_words(t, t.size(),
               "of the " + tx::singularize(ctx.first->object_head) + " " + tx::nominalize(ctx.first->verb));
}

std::string step_verb(const std::string& step) {
  auto tokens = tx::tokenize(step);
  if (tokens.empty() || tokens.front().punct) return {};
  return tx::canonical_verb(tokens.front().lower());
}

}  // namespace

ClauseFacts analyze_clause(const TokenList& clause) {
  ClauseFacts facts;
  TokenList t = tx::strip_lead_ins(clause);
  if (t.empty() || t.front().punct || !tx::is_verb(t.front().lower())) return facts;
  facts.verb = tx::canonical_verb(t.front().lower());
  std::size_t i = 1;
  if ((facts.verb == "search" || facts.verb == "look") && i < t.size() && t[i].is("for")) ++i;
  const std::size_t begin = i;
  while (i < t.size() && !is_boundary(t[i])) ++i;
  if (i == begin) return facts;
  facts.object_core = tx::join(t, begin, i);
  const std::string head = t[i - 1].lower();
  if (!tx::is_object_pronoun(head) && !tx::is_determiner(head)) facts.object_head = head;
  return facts;
}

std::string rewrite_clause(TokenList clause, const RewriteContext& ctx) {
  TokenList t = tx::strip_trailing_punct(tx::strip_politeness(tx::strip_lead_ins(std::move(clause))));
  if (t.empty()) return {};

  std::string verb;
  if (!t[0].punct && tx::is_verb(t[0].lower())) {
    verb = tx::canonical_verb(t[0].lower());
    t[0].text = verb;
  }

  if (!verb.empty() && t.size() >= 2 && tx::is_object_pronoun(t[1].lower()) &&
      (t.size() == 2 || is_boundary(t[2])) && ctx.previous && !ctx.previous->object_head.empty()) {
    t[1] = word(ctx.previous->object_head);
    t.insert(t.begin() + 1, word("the"));
  }

  name_unspecified_entities(t);
  categorize_named_services(t);
  if (!verb.empty()) add_implied_argument(t, verb);
  locate_web_sources(t);
  if (!verb.empty()) front_anaphoric_object(t, verb, ctx);
  if (!verb.empty()) qualify_results(t, ctx);

  return tx::capitalize(tx::join(t));
}

std::vector<std::string> rule_based_plan(const query::RefinedQuery& q) {
  std::vector<TokenList> clauses;
  std::vector<std::string> slots;
  if (q.option_applied == query::Option::decomposition) {
    for (const auto& c : q.clauses) clauses.push_back(tx::tokenize(c));
  } else {
    static const std::regex slot_re(R"(\(([^()?]+)\?\))");
    std::string rest;
    auto begin = std::sregex_iterator(q.text.begin(), q.text.end(), slot_re);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      slots.push_back(tx::trim((*it)[1].str()));
      rest += q.text.substr(last, static_cast<std::size_t>(it->position()) - last);
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    rest += q.text.substr(last);
    clauses = tx::split_clauses(tx::tokenize(rest));
  }

  std::vector<std::string> steps;
  RewriteContext ctx;
  for (auto& clause : clauses) {
    const ClauseFacts facts = analyze_clause(clause);
    std::string step = rewrite_clause(std::move(clause), ctx);
    if (!step.empty() && !tx::content_tokens(step).empty()) {
      steps.push_back(std::move(step));
      if (!ctx.first) ctx.first = facts;
      ctx.previous = facts;
      ++ctx.position;
    }
  }

  if (!steps.empty()) {
    std::string& last_step = steps.back();
    const std::string verb = step_verb(last_step);
    for (const auto& slot : slots) {
      auto arg = tx::expansion_argument(verb);
      if (arg && arg->label == slot) {
        last_step += " " + arg->preposition + " " + slot;
        continue;
      }
      const auto space = slot.find(' ');
      const std::string noun = slot.substr(0, space);
      bool replaced = false;
      for (const std::string article : {"a ", "an "}) {
        const std::string needle = " " + article + noun;
        auto pos = tx::to_lower(last_step).find(needle);
        if (pos != std::string::npos) {
          last_step.replace(pos + 1, needle.size() - 1, slot);
          replaced = true;
          break;
        }
      }
      if (!replaced) last_step += " with " + slot;
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::remove: return "remove";
    case EditKind::append: return "append";
    case EditKind::replace: return "replace";
    case EditKind::reorder: return "reorder";
  }
  return "append";
}

namespace {

std::optional<std::size_t> ordinal(const std::string& w) {
  static const std::vector<std::string> words{"first", "second", "third", "fourth", "fifth",
                                              "sixth", "seventh", "eighth", "ninth", "tenth"};
  auto it = std::find(words.begin(), words.end(), w);
  if (it == words.end()) return std::nullopt;
  return static_cast<std::size_t>(it - words.begin());
}

/// Resolves "step 2", "the second step", "last step" or a verb phrase
/// ("download", "the download node") to a 0-based index.
std::optional<std::size_t> resolve_target(std::string phrase, const std::vector<std::string>& steps) {
  phrase = tx::to_lower(tx::trim(phrase));
  static const std::regex numbered(R"(^(?:the\s+)?(?:step|node)\s+(\d+)$)");
  static const std::regex ordinal_re(R"(^(?:the\s+)?(\w+)\s+(?:step|node)$)");
  std::smatch m;
  if (std::regex_match(phrase, m, numbered)) {
    const std::size_t n = std::stoul(m[1].str());
    if (n >= 1 && n <= steps.size()) return n - 1;
    return std::nullopt;
  }
  if (std::regex_match(phrase, m, ordinal_re)) {
    if (m[1].str() == "last") return steps.empty() ? std::nullopt : std::optional(steps.size() - 1);
    if (auto o = ordinal(m[1].str())) {
      if (*o < steps.size()) return *o;
      return std::nullopt;
    }
  }

  static const std::regex decorations(R"(^(?:the\s+)?['"]?(.*?)['"]?(?:\s+(?:step|node))?$)");
  if (std::regex_match(phrase, m, decorations)) phrase = m[1].str();
  if (phrase.empty()) return std::nullopt;

  auto tokens = tx::tokenize(phrase);
  const std::string first = tokens.empty() ? std::string{} : tx::canonical_verb(tokens.front().lower());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string lower = tx::to_lower(steps[i]);
    if (lower.rfind(phrase, 0) == 0) return i;
  }
  if (tokens.size() == 1) {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (step_verb(steps[i]) == first) return i;
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (tx::to_lower(steps[i]).find(phrase) != std::string::npos) return i;
  }
  return std::nullopt;
}

RewriteContext context_for(const std::vector<std::string>& steps, std::size_t position) {
  RewriteContext ctx;
  ctx.position = position;
  if (!steps.empty() && position > 0) ctx.first = analyze_clause(tx::tokenize(steps.front()));
  if (position > 0 && position - 1 < steps.size()) {
    ctx.previous = analyze_clause(tx::tokenize(steps[position - 1]));
  }
  return ctx;
}

/// New step text for a replacement: inherits the replaced step's object
/// when the new phrase has none ("send via email" -> "send the results
/// via email").
std::string replacement_text(const std::string& phrase, const std::vector<std::string>& steps,
                             std::size_t index) {
  TokenList t = tx::strip_trailing_punct(tx::strip_lead_ins(tx::tokenize(phrase)));
  if (!t.empty() && !t[0].punct && tx::is_verb(t[0].lower())) {
    const bool no_object = t.size() == 1 || is_boundary(t[1]);
    const ClauseFacts old = analyze_clause(tx::tokenize(steps[index]));
    if (no_object && !old.object_core.empty()) insert_words(t, 1, old.object_core);
  }
  return rewrite_clause(std::move(t), context_for(steps, index));
}

}  // namespace

std::optional<Edit> parse_feedback(std::string_view feedback, const std::vector<std::string>& steps) {
  std::string text = tx::collapse_whitespace(feedback);
  {
    auto tokens = tx::strip_trailing_punct(tx::strip_politeness(tx::tokenize(text)));
    text = tx::join(tokens);
  }
  if (text.empty() || steps.empty()) return std::nullopt;

  const auto icase = std::regex::ECMAScript | std::regex::icase;
  static const std::regex remove_re(R"(^(?:remove|delete|drop)\s+(.+)$)", icase);
  static const std::regex replace_re(R"(^(?:replace|swap)\s+(.+?)\s+with\s+(.+)$)", icase);
  static const std::regex change_re(R"(^change\s+(.+?)\s+(?:to|into)\s+(.+)$)", icase);
  static const std::regex move_re(
      R"(^(?:move|reorder)\s+(?:the\s+)?(?:step|node)\s+(\d+)\s+to\s+(?:position\s+|step\s+)?(\d+)$)", icase);
  static const std::regex append_re(
      R"(^(?:add|append)\s+(?:a\s+)?(?:new\s+)?(?:(?:step|node)\s*(?::|to|that)?\s+)?(.+?)(?:\s+at\s+the\s+end)?$)",
      icase);

  std::smatch m;
  Edit edit;
  if (std::regex_match(text, m, move_re)) {
    const std::size_t from = std::stoul(m[1].str());
    const std::size_t to = std::stoul(m[2].str());
    if (from < 1 || to < 1 || from > steps.size() || to > steps.size()) return std::nullopt;
    edit.kind = EditKind::reorder;
    edit.from = from - 1;
    edit.to = to - 1;
    return edit;
  }
  if (std::regex_match(text, m, replace_re) || std::regex_match(text, m, change_re)) {
    auto target = resolve_target(m[1].str(), steps);
    if (!target) return std::nullopt;
    std::string replacement = replacement_text(m[2].str(), steps, *target);
    if (replacement.empty()) return std::nullopt;
    edit.kind = EditKind::replace;
    edit.from = *target;
    edit.text = std::move(replacement);
    return edit;
  }
  if (std::regex_match(text, m, remove_re)) {
    auto target = resolve_target(m[1].str(), steps);
    if (!target || steps.size() < 2) return std::nullopt;
    edit.kind = EditKind::remove;
    edit.from = *target;
    return edit;
  }
  if (std::regex_match(text, m, append_re)) {
    std::string step = rewrite_clause(tx::tokenize(m[1].str()), context_for(steps, steps.size()));
    if (step.empty() || tx::content_tokens(step).empty()) return std::nullopt;
    edit.kind = EditKind::append;
    edit.text = std::move(step);
    return edit;
  }
  return std::nullopt;
}

std::vector<std::string> apply_edit(std::vector<std::string> steps, const Edit& edit) {
  switch (edit.kind) {
    case EditKind::remove:
      steps.erase(steps.begin() + static_cast<std::ptrdiff_t>(edit.from));
      break;
    case EditKind::append:
      steps.push_back(edit.text);
      break;
    case EditKind::replace:
      steps[edit.from] = edit.text;
      break;
    case EditKind::reorder: {
      std::string moved = std::move(steps[edit.from]);
      steps.erase(steps.begin() + static_cast<std::ptrdiff_t>(edit.from));
      steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(edit.to), std::move(moved));
      break;
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------

std::string_view plan_instruction() {
  return "You are the task planning agent of a workflow builder. Turn the refined request "
         "into an ordered list of short imperative steps, one action per step, keeping the "
         "user's nouns. Answer with JSON {\"steps\": [\"...\"]}.";
}

std::string_view refine_instruction() {
  return "You are the plan refinement agent. Apply the human feedback to the current plan "
         "as one edit: remove a step, append a step, replace a step, or reorder a step. "
         "Answer with JSON {\"steps\": [...], \"edit\": {\"kind\": "
         "\"remove|append|replace|reorder\"}} or {\"error\": \"uninterpretable_feedback\", "
         "\"message\": ...} when the feedback is not an edit.";
}

json rule_based_plan_respond(const json& payload) {
  const auto q = query::refined_query_from_json(payload.at("query"));
  return json{{"steps", rule_based_plan(q)}};
}

json rule_based_refine_respond(const json& payload) {
  const auto steps = payload.at("plan").get<std::vector<std::string>>();
  const auto feedback = payload.at("feedback").get<std::string>();
  auto edit = parse_feedback(feedback, steps);
  if (!edit) {
    return json{{"error", "uninterpretable_feedback"},
                {"message", "cannot map feedback to an edit: \"" + feedback + "\""}};
  }
  json e{{"kind", std::string(to_string(edit->kind))}};
  if (edit->kind != EditKind::append) e["from"] = edit->from;
  if (edit->kind == EditKind::reorder) e["to"] = edit->to;
  if (!edit->text.empty()) e["text"] = edit->text;
  return json{{"steps", apply_edit(steps, *edit)}, {"edit", std::move(e)}};
}

Plan Planner::plan(const query::RefinedQuery& q) const {
  agents::AgentRequest req;
  req.role = agents::Role::planner;
  req.instruction = std::string(plan_instruction());
  req.payload = json{{"query", query::to_json(q)}};
  try {
    const auto resp = gateway_.invoke(req);
    return Plan{resp.content["steps"].get<std::vector<std::string>>(), 0, false};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::malformed_response) throw;
    throw Error(ErrorCode::planning_failed, std::string("planning failed: ") + e.what(), e.details());
  }
}

RefineResult Planner::refine(const Plan& plan, const Feedback& feedback) const {
  if (plan.final) throw Error(ErrorCode::plan_final, "plan is already approved");

  RefineResult out;
  out.record.iteration = plan.iteration;
  out.record.feedback = feedback.text;
  out.record.plan_before = plan.steps;

  if (feedback.kind == FeedbackKind::approve) {
    out.plan = plan;
    out.plan.final = true;
    out.record.plan_after = plan.steps;
    out.record.approved = true;
    return out;
  }

  if (plan.iteration >= kMaxIterations) {
    throw Error(ErrorCode::iteration_limit_exceeded,
                "refinement limit of " + std::to_string(kMaxIterations) + " iterations reached");
  }
  if (tx::trim(feedback.text).empty()) {
    throw Error(ErrorCode::bad_request, "modify feedback must carry text");
  }

  agents::AgentRequest req;
  req.role = agents::Role::refiner;
  req.instruction = std::string(refine_instruction());
  req.payload = json{{"plan", plan.steps}, {"feedback", feedback.text}};
  const auto resp = gateway_.invoke(req);
  if (resp.content.contains("error")) {
    throw Error(ErrorCode::uninterpretable_feedback, resp.content["message"].get<std::string>());
  }
  out.plan = Plan{resp.content["steps"].get<std::vector<std::string>>(), plan.iteration + 1, false};
  out.record.plan_after = out.plan.steps;
  return out;
}

Plan Planner::replay(const std::vector<model::RefinementRecord>& history) const {
  if (history.empty()) throw Error(ErrorCode::bad_request, "nothing to replay");
  Plan p{history.front().plan_before, history.front().iteration, false};
  for (const auto& rec : history) {
    p = refine(p, rec.approved ? Feedback::approve() : Feedback::modify(rec.feedback)).plan;
  }
  return p;
}

}  // namespace intentflow::planning
