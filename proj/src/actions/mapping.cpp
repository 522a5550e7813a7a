#include "intentflow/actions/mapping.hpp"

#include "intentflow/error.hpp"
#include "intentflow/model/serialize.hpp"
#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <set>

namespace intentflow::actions {

using nlohmann::json;
namespace tx = intentflow::text;

namespace {

std::set<std::string> label_words(std::string_view label) {
  std::set<std::string> out;
  for (const auto& w : tx::content_tokens(label)) out.insert(tx::singularize(w));
  return out;
}

bool share_word(std::string_view a, std::string_view b) {
  const auto wa = label_words(a);
  for (const auto& w : label_words(b)) {
    if (wa.count(w)) return true;
  }
  return false;
}

bool kind_compatible(ParamKind p, model::SourceKind s) {
  switch (s) {
    case model::SourceKind::upstream: return true;
    case model::SourceKind::file: return p == ParamKind::file || p == ParamKind::table;
    case model::SourceKind::url: return p == ParamKind::url || p == ParamKind::file || p == ParamKind::table;
    case model::SourceKind::database: return p == ParamKind::table;
  }
  return false;
}

bool label_mentions(std::string_view label, std::initializer_list<std::string_view> words) {
  const auto ws = label_words(label);
  return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return ws.count(std::string(w)) > 0; });
}

std::string strip_preposition(const std::string& text) {
  auto tokens = tx::tokenize(text);
  if (tokens.size() > 1 && !tokens.front().punct && tx::is_preposition(tokens.front().lower())) {
    tokens.erase(tokens.begin());
  }
  return tx::join(tokens);
}

}  // namespace

bool verb_matches(std::string_view verb, std::string_view action_name) {
  if (verb.empty()) return false;
  const auto cut = action_name.find('_');
  return tx::to_lower(verb) == tx::to_lower(action_name.substr(0, cut));
}

bool capsule_fits(const ParameterSpec& p, const model::DataCapsule& capsule) {
  if (share_word(p.label, capsule.label)) return true;
  if (!capsule.resolved() || !capsule.source) {
    return p.kind == ParamKind::file || p.kind == ParamKind::url || p.kind == ParamKind::table;
  }
  return kind_compatible(p.kind, capsule.source->kind);
}

std::string context_value(const ParameterSpec& p, const std::vector<model::ContextAnnotation>& context) {
  if (p.kind != ParamKind::text) return {};
  for (const auto& c : context) {
    if (share_word(p.label, c.text)) return strip_preposition(c.text);
  }
  auto first_of = [&](std::initializer_list<model::ContextKind> kinds) -> std::string {
    for (const auto& c : context) {
      if (std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end()) return strip_preposition(c.text);
    }
    return {};
  };
  if (label_mentions(p.label, {"language"})) {
    return first_of({model::ContextKind::destination, model::ContextKind::format});
  }
  if (label_mentions(p.label, {"condition", "rule", "predicate", "criterion", "criteria"})) {
    return first_of({model::ContextKind::constraint});
  }
  if (label_mentions(p.label, {"template", "format"})) return first_of({model::ContextKind::format});
  return {};
}

double parameter_fraction(const ActionDescriptor& a, const model::Step& step) {
  const auto required = a.required_parameters();
  if (required.empty()) return 1.0;
  // Same passes as bind_parameters, each capsule used once, but a capsule
  // still waiting for its source counts for the kinds it could hold.
  std::vector<bool> used(step.data.size(), false);
  std::set<const ParameterSpec*> filled;
  auto take = [&](const ParameterSpec* p, auto&& fits) {
    for (std::size_t i = 0; i < step.data.size(); ++i) {
      if (!used[i] && fits(*p, step.data[i])) {
        used[i] = true;
        filled.insert(p);
        return;
      }
    }
  };
  for (const ParameterSpec* p : required) {
    take(p, [](const ParameterSpec& q, const model::DataCapsule& c) { return share_word(q.label, c.label); });
  }
  for (const ParameterSpec* p : required) {
    if (!filled.count(p) && !context_value(*p, step.context).empty()) filled.insert(p);
  }
  for (const ParameterSpec* p : required) {
    if (!filled.count(p)) take(p, capsule_fits);
  }
  return static_cast<double>(filled.size()) / static_cast<double>(required.size());
}

double mapping_score(double similarity, const ActionDescriptor& a, const model::Step& step, const MappingWeights& w) {
  return similarity + w.verb_bonus * (verb_matches(step.verb, a.name) ? 1.0 : 0.0) +
         w.parameter_bonus * parameter_fraction(a, step);
}

std::size_t argmax(const std::vector<ScoredCandidate>& scored) {
  if (scored.empty()) throw Error(ErrorCode::bad_request, "no candidates to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i) {
    const auto kb = ranking_key(scored[best].score);
    const auto ki = ranking_key(scored[i].score);
    if (ki > kb || (ki == kb && scored[i].action_id < scored[best].action_id)) best = i;
  }
  return best;
}

BindResult bind_parameters(const ActionDescriptor& a, const model::Step& step) {
  BindResult out;
  std::vector<bool> used(step.data.size(), false);
  auto usable = [&](std::size_t i) { return !used[i] && step.data[i].resolved() && step.data[i].source; };

  for (const auto& p : a.parameter_schema) {
    for (std::size_t i = 0; i < step.data.size(); ++i) {
      if (usable(i) && share_word(p.label, step.data[i].label)) {
        out.parameters[p.label] = *step.data[i].source;
        used[i] = true;
        break;
      }
    }
  }
  for (const auto& p : a.parameter_schema) {
    if (out.parameters.count(p.label)) continue;
    std::string v = context_value(p, step.context);
    if (!v.empty()) out.parameters[p.label] = std::move(v);
  }
  for (const auto& p : a.parameter_schema) {
    if (out.parameters.count(p.label)) continue;
    for (std::size_t i = 0; i < step.data.size(); ++i) {
      if (usable(i) && kind_compatible(p.kind, step.data[i].source->kind)) {
        out.parameters[p.label] = *step.data[i].source;
        used[i] = true;
        break;
      }
    }
  }
  for (const auto& p : a.parameter_schema) {
    if (p.required && !out.parameters.count(p.label)) out.missing.push_back(p.label);
  }
  return out;
}

namespace {

std::vector<ScoredCandidate> score_all(const model::Step& step, const CandidateSet& candidates,
                                       const std::vector<const ActionDescriptor*>& actions, const MappingWeights& w) {
  std::vector<ScoredCandidate> out;
  for (std::size_t i = 0; i < candidates.candidates.size(); ++i) {
    const auto& c = candidates.candidates[i];
    out.push_back({c.action_id, c.similarity, mapping_score(c.similarity, *actions[i], step, w)});
  }
  return out;
}

std::vector<const ActionDescriptor*> resolve_candidates(const CandidateSet& candidates,
                                                        const std::vector<ActionDescriptor>& pool) {
  if (candidates.candidates.empty()) throw Error(ErrorCode::bad_request, "no candidates to map");
  std::vector<const ActionDescriptor*> out;
  for (const auto& c : candidates.candidates) {
    const ActionDescriptor* a = find_in(pool, c.action_id);
    if (!a) throw Error(ErrorCode::bad_request, "candidate " + c.action_id + " is not in the action pool");
    out.push_back(a);
  }
  return out;
}

MappingResult finish(const model::Step& step, const ActionDescriptor& chosen, double score,
                     std::vector<ScoredCandidate> scores) {
  MappingResult out;
  auto bound = bind_parameters(chosen, step);
  out.binding.action_id = chosen.id;
  out.binding.verb = step.verb;
  out.binding.score = score;
  out.binding.parameters = std::move(bound.parameters);
  out.missing = std::move(bound.missing);
  out.scores = std::move(scores);
  return out;
}

}  // namespace

MappingResult map_action(const model::Step& step, const CandidateSet& candidates,
                         const std::vector<ActionDescriptor>& pool, const MappingWeights& w) {
  const auto actions = resolve_candidates(candidates, pool);
  auto scores = score_all(step, candidates, actions, w);
  const std::size_t best = argmax(scores);
  const double score = scores[best].score;
  return finish(step, *actions[best], score, std::move(scores));
}

json mapping_payload(const model::Step& step, const CandidateSet& candidates,
                     const std::vector<ActionDescriptor>& pool) {
  json cands = json::array();
  for (const ActionDescriptor* a : resolve_candidates(candidates, pool)) {
    json m = to_manifest(*a);
    for (const auto& c : candidates.candidates) {
      if (c.action_id == a->id) m["similarity"] = c.similarity;
    }
    m["action_id"] = a->id;
    cands.push_back(std::move(m));
  }
  return json{{"step", model::to_json(step)}, {"candidates", std::move(cands)}};
}

std::string_view map_instruction() {
  return "You are the action mapping agent. Given a workflow step (text, verb, data capsules, "
         "context) and candidate actions with descriptions, parameter schemas and retrieval "
         "similarity, pick the action that best performs the step. Answer with JSON "
         "{\"action_id\": ..., \"scores\": [{\"action_id\": ..., \"score\": ...}]}.";
}

json rule_based_map_respond(const json& payload) {
  model::DecodeContext ctx;
  const model::Step step = model::step_from_json(payload.at("step"), "$.step", ctx);
  std::vector<ActionDescriptor> actions;
  CandidateSet set;
  for (const auto& c : payload.at("candidates")) {
    actions.push_back(from_manifest(c));
    set.candidates.push_back({c.at("action_id").get<std::string>(), c.value("similarity", 0.0)});
  }
  std::vector<const ActionDescriptor*> ptrs;
  for (const auto& a : actions) ptrs.push_back(&a);
  const auto scores = score_all(step, set, ptrs, MappingWeights{});
  json list = json::array();
  for (const auto& s : scores) list.push_back(json{{"action_id", s.action_id}, {"score", s.score}});
  return json{{"action_id", scores[argmax(scores)].action_id}, {"scores", std::move(list)}};
}

MappingResult Mapper::map(const model::Step& step, const CandidateSet& candidates,
                          const std::vector<ActionDescriptor>& pool) const {
  const auto actions = resolve_candidates(candidates, pool);
  agents::AgentRequest req;
  req.role = agents::Role::mapper;
  req.instruction = std::string(map_instruction());
  req.payload = mapping_payload(step, candidates, pool);
  const json content = gateway_.invoke(req).content;

  const std::string chosen = content.at("action_id").get<std::string>();
  auto local = score_all(step, candidates, actions, MappingWeights{});
  if (content.contains("scores")) {
    for (const auto& s : content["scores"]) {
      for (auto& l : local) {
        if (l.action_id == s.at("action_id").get<std::string>()) l.score = s.at("score").get<double>();
      }
    }
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i]->id == chosen) {
      const double score = local[i].score;
      return finish(step, *actions[i], score, std::move(local));
    }
  }
  throw Error(ErrorCode::malformed_response, "mapper chose an action outside the candidates");
}

}  // namespace intentflow::actions
