#include "intentflow/extraction/extractor.hpp"

#include "intentflow/error.hpp"
#include "intentflow/text/clauses.hpp"

#include <algorithm>

namespace intentflow::extraction {

using nlohmann::json;
namespace tx = intentflow::text;
using tx::Token;
using tx::TokenList;
using model::ContextAnnotation;
using model::ContextKind;

std::vector<std::string> EntitySet::all_labels() const {
  std::vector<std::string> out;
  for (const auto& s : steps) out.insert(out.end(), s.data_labels.begin(), s.data_labels.end());
  return out;
}

json to_json(const EntitySet& e) {
  json steps = json::array();
  for (const auto& s : e.steps) {
    json ctx = json::array();
    for (const auto& c : s.context) {
      ctx.push_back(json{{"text", c.text}, {"kind", std::string(model::to_string(c.kind))}});
    }
    json rec{{"step_index", s.step_index},
             {"action_verb", s.action_verb},
             {"data_labels", s.data_labels},
             {"context", std::move(ctx)}};
    if (s.error) rec["error"] = *s.error;
    steps.push_back(std::move(rec));
  }
  return json{{"steps", std::move(steps)}};
}

EntitySet entity_set_from_json(const json& j) {
  EntitySet out;
  for (const auto& s : j.at("steps")) {
    StepEntities e;
    e.step_index = s.at("step_index").get<std::size_t>();
    e.action_verb = s.at("action_verb").get<std::string>();
    e.data_labels = s.at("data_labels").get<std::vector<std::string>>();
    for (const auto& c : s.at("context")) {
      auto kind = model::parse_context_kind(c.at("kind").get<std::string>());
      e.context.push_back({c.at("text").get<std::string>(), kind.value_or(ContextKind::other)});
    }
    if (s.contains("error") && s["error"].is_string()) e.error = s["error"].get<std::string>();
    out.steps.push_back(std::move(e));
  }
  return out;
}

namespace {

enum class SegmentKind { object, phrase, subordinate };

struct Segment {
  SegmentKind kind = SegmentKind::object;
  std::string preposition;  // lower case, phrase segments only
  TokenList words;          // noun phrase (phrase) or whole segment
};

bool stops_phrase(const Token& t) {
  if (t.punct) return true;
  const auto l = t.lower();
  return tx::is_preposition(l) || tx::is_subordinator(l);
}

std::string head_of(const TokenList& np) {
  for (auto it = np.rbegin(); it != np.rend(); ++it) {
    if (!it->punct) return it->lower();
  }
  return {};
}

/// Noun phrase starting at `i` up to the next preposition, subordinator
/// or punctuation.
std::size_t phrase_end(const TokenList& t, std::size_t i) {
  while (i < t.size() && !stops_phrase(t[i])) ++i;
  return i;
}

std::vector<Segment> segment(const TokenList& t, std::size_t start) {
  std::vector<Segment> out;
  std::size_t i = start;
  {
    const std::size_t end = phrase_end(t, i);
    if (end > i) out.push_back({SegmentKind::object, {}, TokenList(t.begin() + i, t.begin() + end)});
    i = end;
  }
  while (i < t.size()) {
    const Token& tok = t[i];
    if (tok.punct) {
      ++i;
      continue;
    }
    const std::string l = tok.lower();
    if (tx::is_subordinator(l)) {
      // A condition runs until a data preposition introducing an input noun.
      std::size_t j = i + 1;
      for (; j < t.size(); ++j) {
        if (t[j].punct || !tx::is_data_preposition(t[j].lower())) continue;
        const std::size_t end = phrase_end(t, j + 1);
        if (end > j + 1 && tx::is_input_noun(head_of(TokenList(t.begin() + j + 1, t.begin() + end)))) break;
      }
      out.push_back({SegmentKind::subordinate, {}, TokenList(t.begin() + i, t.begin() + j)});
      i = j;
      continue;
    }
    if (tx::is_preposition(l)) {
      const std::size_t end = phrase_end(t, i + 1);
      out.push_back({SegmentKind::phrase, l, TokenList(t.begin() + i + 1, t.begin() + end)});
      i = end;
      continue;
    }
    // Stray word after a phrase: attach to the previous segment.
    if (out.empty()) out.push_back({SegmentKind::object, {}, {}});
    out.back().words.push_back(tok);
    ++i;
  }
  return out;
}

ContextKind phrase_kind(const std::string& prep) {
  if (prep == "into" || prep == "as") return ContextKind::format;
  if (prep == "to" || prep == "via") return ContextKind::destination;
  return ContextKind::other;
}

bool is_pronoun_phrase(const TokenList& np) {
  return np.size() == 1 && tx::is_object_pronoun(np.front().lower());
}

struct Collector {
  StepEntities& out;

  void context(std::string text, ContextKind kind) {
    text = tx::trim(text);
    if (!text.empty()) out.context.push_back({std::move(text), kind});
  }

  /// Strips determiners, moves a leading collection marker to a format
  /// context and a trailing proper-noun appositive to a constraint.
  void data(TokenList np) {
    const bool definite = !np.empty() && tx::is_definite(np.front().lower());
    while (!np.empty() && tx::is_determiner(np.front().lower())) np.erase(np.begin());
    if (np.size() > 1 && tx::is_collection_marker(np.front().lower())) {
      context(np.front().text, ContextKind::format);
      np.erase(np.begin());
    }
    std::size_t keep = np.size();
    while (keep > 1 && tx::is_proper_noun(np[keep - 1].text) && !tx::is_proper_noun(np[keep - 2].text)) --keep;
    if (keep < np.size() && keep > 0) {
      context(tx::join(np, keep, np.size()), ContextKind::constraint);
      np.resize(keep);
    }
    // "the results" on the first step points back at nothing.
    if (out.step_index == 0 && definite && np.size() == 1 && tx::is_result_noun(np.front().lower())) return;
    std::string label = tx::join(np);
    if (label.empty() || tx::content_tokens(label).empty()) return;
    if (std::find(out.data_labels.begin(), out.data_labels.end(), label) == out.data_labels.end()) {
      out.data_labels.push_back(std::move(label));
    }
  }
};

}  // namespace

StepEntities rule_based_extract_step(std::size_t index, const std::string& text) {
  StepEntities out;
  out.step_index = index;
  const TokenList t = tx::strip_trailing_punct(tx::tokenize(text));
  if (t.empty() || t.front().punct || !tx::is_verb(t.front().lower())) {
    out.error = kNoVerbFound;
    return out;
  }
  out.action_verb = t.front().text;

  auto segments = segment(t, 1);
  const bool has_source = std::any_of(segments.begin(), segments.end(), [](const Segment& s) {
    return s.kind == SegmentKind::phrase && s.preposition == "from" && !s.words.empty() &&
           !is_pronoun_phrase(s.words);
  });

  Collector c{out};
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Segment& s = segments[k];
    switch (s.kind) {
      case SegmentKind::object: {
        if (s.words.empty() || is_pronoun_phrase(s.words)) break;
        const bool literal = s.words.size() == 1 && tx::is_literal_marker(s.words.front().text);
        if (literal && k + 1 < segments.size() && segments[k + 1].kind == SegmentKind::subordinate) {
          c.context(tx::join(s.words) + " " + tx::join(segments[k + 1].words), ContextKind::constraint);
          ++k;
        } else if (literal || has_source) {
          c.context(tx::join(s.words), literal ? ContextKind::constraint : ContextKind::other);
        } else {
          c.data(s.words);
        }
        break;
      }
      case SegmentKind::subordinate:
        c.context(tx::join(s.words), ContextKind::constraint);
        break;
      case SegmentKind::phrase: {
        const std::string head = head_of(s.words);
        const bool is_data = !s.words.empty() && !is_pronoun_phrase(s.words) &&
                             (tx::is_data_preposition(s.preposition) || tx::is_input_noun(head));
        if (is_data) {
          c.data(s.words);
        } else {
          TokenList phrase{Token{s.preposition, false}};
          phrase.insert(phrase.end(), s.words.begin(), s.words.end());
          // Keep the original casing of the preposition.
          for (const auto& tok : t) {
            if (tok.lower() == s.preposition) {
              phrase.front().text = tok.text;
              break;
            }
          }
          c.context(tx::join(phrase), phrase_kind(s.preposition));
        }
        break;
      }
    }
  }
  return out;
}

EntitySet rule_based_extract(const std::vector<std::string>& steps) {
  EntitySet out;
  for (std::size_t i = 0; i < steps.size(); ++i) out.steps.push_back(rule_based_extract_step(i, steps[i]));
  return out;
}

bool is_anaphoric(const std::string& text, const std::string& label) {
  const TokenList t = tx::tokenize(text);
  const TokenList l = tx::tokenize(label);
  if (l.empty()) return false;
  for (std::size_t i = 1; i + l.size() <= t.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < l.size() && match; ++k) match = t[i + k].lower() == l[k].lower();
    if (match && tx::is_definite(t[i - 1].lower())) return true;
  }
  return false;
}

std::optional<std::size_t> resolve_anaphora(const std::vector<std::string>& steps, std::size_t index,
                                            const std::string& label) {
  if (index == 0 || index > steps.size()) return std::nullopt;
  const TokenList l = tx::tokenize(label);
  if (l.empty()) return std::nullopt;
  const std::string head = l.back().lower();
  if (tx::is_result_noun(head)) return index - 1;
  const std::string wanted = tx::singularize(head);
  for (std::size_t j = index; j-- > 0;) {
    auto words = tx::content_tokens(steps[j]);
    const auto first = tx::tokenize(steps[j]);
    if (!words.empty() && !first.empty() && words.front() == first.front().lower()) words.erase(words.begin());
    for (const auto& w : words) {
      if (tx::singularize(w) == wanted) return j;
    }
  }
  return std::nullopt;
}

model::Workflow materialize(const EntitySet& entities, model::Workflow workflow) {
  if (entities.steps.size() != workflow.steps.size()) {
    throw Error(ErrorCode::index_mismatch,
                "entity set has " + std::to_string(entities.steps.size()) + " steps, workflow has " +
                    std::to_string(workflow.steps.size()));
  }
  const auto texts = workflow.plan_texts();
  for (std::size_t i = 0; i < entities.steps.size(); ++i) {
    const StepEntities& e = entities.steps[i];
    if (e.step_index != i || workflow.steps[i].index != i) {
      throw Error(ErrorCode::index_mismatch, "entity record " + std::to_string(e.step_index) +
                                                 " does not match step " + std::to_string(i));
    }
    model::Step& step = workflow.steps[i];
    std::vector<model::DataCapsule> capsules;
    for (const auto& label : e.data_labels) {
      model::DataCapsule cap{label, model::CapsuleState::unresolved, std::nullopt};
      auto prior = std::find_if(step.data.begin(), step.data.end(), [&](const model::DataCapsule& d) {
        return d.label == label && d.resolved() && d.source->kind != model::SourceKind::upstream;
      });
      if (prior != step.data.end()) {
        cap = *prior;
      } else if (is_anaphoric(step.text, label)) {
        if (auto j = resolve_anaphora(texts, i, label)) {
          cap.state = model::CapsuleState::resolved;
          cap.source = model::DataSource::upstream(*j);
        }
      }
      capsules.push_back(std::move(cap));
    }
    step.data = std::move(capsules);
    step.verb = e.action_verb;
    step.context = e.context;
  }
  return workflow;
}

std::string_view extract_instruction() {
  return "You are the entity extraction agent. For every plan step return its leading "
         "imperative verb (action_verb), the noun phrases that need an input (data_labels, "
         "copied verbatim from the step) and the remaining descriptive phrases as context "
         "{text, kind: format|constraint|destination|other}. Answer with JSON {\"steps\": "
         "[{\"step_index\", \"action_verb\", \"data_labels\", \"context\"}]}.";
}

json rule_based_extract_respond(const json& payload) {
  return to_json(rule_based_extract(payload.at("steps").get<std::vector<std::string>>()));
}

EntitySet EntityExtractor::extract(const std::vector<std::string>& steps) const {
  if (steps.empty()) throw Error(ErrorCode::extraction_failed, "plan has no steps");
  agents::AgentRequest req;
  req.role = agents::Role::entity_extractor;
  req.instruction = std::string(extract_instruction());
  req.payload = json{{"steps", steps}};
  try {
    return entity_set_from_json(gateway_.invoke(req).content);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::malformed_response) throw;
    throw Error(ErrorCode::extraction_failed, std::string("extraction failed: ") + e.what(), e.details());
  }
}

}  // namespace intentflow::extraction
