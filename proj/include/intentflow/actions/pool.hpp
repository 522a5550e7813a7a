#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace intentflow::actions {

// ---------------------------------------------------------------------------
// Offline embedder: lowercase alphanumeric tokens hashed (FNV-1a 64) into
// kDimension buckets, term counts, L2 normalized.

inline constexpr std::size_t kDimension = 256;
inline constexpr std::size_t kDefaultTopK = 10;

using Embedding = std::vector<double>;
using TermCounts = std::array<std::uint32_t, kDimension>;

std::uint64_t fnv1a64(std::string_view bytes);
std::vector<std::string> embedding_tokens(std::string_view text);
TermCounts term_counts(std::string_view text);

/// Errors: empty_text when the text has no alphanumeric token.
Embedding embed_text(std::string_view text);
double dot(const Embedding& a, const Embedding& b);

// ---------------------------------------------------------------------------

enum class ParamKind { file, url, text, table };
enum class ExecutorKind { builtin, http_api, shell_out };

std::string_view to_string(ParamKind k);
std::string_view to_string(ExecutorKind k);
std::optional<ParamKind> parse_param_kind(std::string_view s);
std::optional<ExecutorKind> parse_executor_kind(std::string_view s);

struct ParameterSpec {
  std::string label;
  bool required = true;
  ParamKind kind = ParamKind::text;
  bool operator==(const ParameterSpec&) const = default;
};

struct ActionDescriptor {
  std::string id;
  std::string name;
  std::string description;
  std::vector<ParameterSpec> parameter_schema;
  ExecutorKind executor_kind = ExecutorKind::builtin;
  /// {"builtin": name} | {"endpoint": url} | {"command": template}
  nlohmann::json executor_config = nlohmann::json::object();
  Embedding embedding;

  std::vector<const ParameterSpec*> required_parameters() const;
  bool operator==(const ActionDescriptor&) const = default;
};

/// Text embedded for an action: name with underscores as spaces, then the
/// description.
std::string action_text(const ActionDescriptor& a);

/// Manifest document (no embedding). Errors: validation_failed naming the
/// offending field.
nlohmann::json to_manifest(const ActionDescriptor& a);
ActionDescriptor from_manifest(const nlohmann::json& j);
/// Every *.json file in `dir`, sorted by file name.
std::vector<ActionDescriptor> load_manifest_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------

using PoolSnapshot = std::shared_ptr<const std::vector<ActionDescriptor>>;

/// Registered actions. Readers take an immutable snapshot; writers swap in
/// a new one.
class ActionPool {
public:
  /// Computes the embedding. Errors: conflict on a duplicate id,
  /// validation_failed on an empty id/name/description.
  void add(ActionDescriptor a);
  /// Replaces an action with the same id or adds it.
  void upsert(ActionDescriptor a);
  bool remove(const std::string& id);

  PoolSnapshot snapshot() const;
  std::optional<ActionDescriptor> find(const std::string& id) const;
  std::size_t size() const;

private:
  mutable std::shared_mutex mutex_;
  PoolSnapshot actions_ = std::make_shared<const std::vector<ActionDescriptor>>();
};

const ActionDescriptor* find_in(const std::vector<ActionDescriptor>& actions, const std::string& id);

// ---------------------------------------------------------------------------

struct Candidate {
  std::string action_id;
  double similarity = 0.0;
  bool operator==(const Candidate&) const = default;
};

struct CandidateSet {
  std::size_t step_index = 0;
  std::vector<Candidate> candidates;
  bool operator==(const CandidateSet&) const = default;
};

nlohmann::json to_json(const CandidateSet& c);

/// Score rounded to a 2^-40 grid so mathematically equal sums computed in
/// different orders still tie.
std::int64_t ranking_key(double similarity);

/// Top-k by cosine similarity of term counts, compared exactly; ties by
/// ascending action id.
/// Errors: empty_pool, empty_text, bad_request (k = 0).
CandidateSet retrieve(std::string_view step_text, const std::vector<ActionDescriptor>& pool,
                      std::size_t k = kDefaultTopK, std::size_t step_index = 0);

}  // namespace intentflow::actions
