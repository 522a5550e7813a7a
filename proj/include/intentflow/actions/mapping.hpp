#pragma once

#include "intentflow/actions/pool.hpp"
#include "intentflow/agents/gateway.hpp"
#include "intentflow/model/workflow.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace intentflow::actions {

struct MappingWeights {
  double verb_bonus = 0.25;
  double parameter_bonus = 0.10;
};

/// True when the lower-cased verb equals the action name up to its first
/// underscore ("send" ~ "send_email").
bool verb_matches(std::string_view verb, std::string_view action_name);

/// Can `capsule` feed parameter `p`? Shared label words always match;
/// otherwise unresolved capsules fit external kinds (file, url, table)
/// and resolved ones need a compatible source kind. Upstream outputs fit
/// any kind.
bool capsule_fits(const ParameterSpec& p, const model::DataCapsule& capsule);

/// Context text usable as a text parameter, preposition removed; empty
/// when none fits.
std::string context_value(const ParameterSpec& p, const std::vector<model::ContextAnnotation>& context);

/// Share of required parameters some capsule or context phrase could
/// satisfy; 1.0 when nothing is required.
double parameter_fraction(const ActionDescriptor& a, const model::Step& step);

/// R = similarity + verb_bonus * verb match + parameter_bonus * fraction.
double mapping_score(double similarity, const ActionDescriptor& a, const model::Step& step,
                     const MappingWeights& w = {});

struct ScoredCandidate {
  std::string action_id;
  double similarity = 0.0;
  double score = 0.0;
};

/// Highest score wins; equal scores go to the lower id.
std::size_t argmax(const std::vector<ScoredCandidate>& scored);

struct BindResult {
  std::map<std::string, model::ParameterValue> parameters;
  /// Required parameters nothing could fill.
  std::vector<std::string> missing;
};

/// Fills parameters from resolved capsules (label words first, then
/// compatible kinds, each capsule used once) and text parameters from
/// context phrases.
BindResult bind_parameters(const ActionDescriptor& a, const model::Step& step);

struct MappingResult {
  model::ActionBinding binding;
  std::vector<ScoredCandidate> scores;
  std::vector<std::string> missing;
};

/// Rule-based selection over a candidate set, no gateway involved.
MappingResult map_action(const model::Step& step, const CandidateSet& candidates,
                         const std::vector<ActionDescriptor>& pool, const MappingWeights& w = {});

/// Mapping through the gateway's mapper role.
class Mapper {
public:
  explicit Mapper(const agents::Gateway& gateway) : gateway_(gateway) {}

  /// Errors: bad_request when candidates are empty or unknown to the pool.
  MappingResult map(const model::Step& step, const CandidateSet& candidates,
                    const std::vector<ActionDescriptor>& pool) const;

private:
  const agents::Gateway& gateway_;
};

nlohmann::json mapping_payload(const model::Step& step, const CandidateSet& candidates,
                               const std::vector<ActionDescriptor>& pool);
std::string_view map_instruction();
/// Rule-based answer: {"action_id", "scores": [{action_id, score}]}.
nlohmann::json rule_based_map_respond(const nlohmann::json& payload);

}  // namespace intentflow::actions
