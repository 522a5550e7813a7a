#include "intentflow/actions/pool.hpp"

#include "intentflow/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace intentflow::actions {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> embedding_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TermCounts term_counts(std::string_view text) {
  TermCounts counts{};
  for (const auto& tok : embedding_tokens(text)) ++counts[fnv1a64(tok) % kDimension];
  return counts;
}

Embedding embed_text(std::string_view text) {
  const TermCounts counts = term_counts(text);
  double norm2 = 0.0;
  for (auto c : counts) norm2 += static_cast<double>(c) * c;
  if (norm2 == 0.0) throw Error(ErrorCode::empty_text, "cannot embed text without words");
  const double norm = std::sqrt(norm2);
  Embedding e(kDimension);
  for (std::size_t i = 0; i < kDimension; ++i) e[i] = counts[i] / norm;
  return e;
}

double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::file: return "file";
    case ParamKind::url: return "url";
    case ParamKind::text: return "text";
    case ParamKind::table: return "table";
  }
  return "text";
}

std::string_view to_string(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::builtin: return "builtin";
    case ExecutorKind::http_api: return "http_api";
    case ExecutorKind::shell_out: return "shell-out";
  }
  return "builtin";
}

std::optional<ParamKind> parse_param_kind(std::string_view s) {
  for (auto k : {ParamKind::file, ParamKind::url, ParamKind::text, ParamKind::table}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<ExecutorKind> parse_executor_kind(std::string_view s) {
  if (s == "shell_out") return ExecutorKind::shell_out;
  for (auto k : {ExecutorKind::builtin, ExecutorKind::http_api, ExecutorKind::shell_out}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<const ParameterSpec*> ActionDescriptor::required_parameters() const {
  std::vector<const ParameterSpec*> out;
  for (const auto& p : parameter_schema) {
    if (p.required) out.push_back(&p);
  }
  return out;
}

std::string action_text(const ActionDescriptor& a) {
  std::string name = a.name;
  std::replace(name.begin(), name.end(), '_', ' ');
  return name + " " + a.description;
}

json to_manifest(const ActionDescriptor& a) {
  json params = json::array();
  for (const auto& p : a.parameter_schema) {
    params.push_back(json{{"label", p.label}, {"required", p.required}, {"kind", std::string(to_string(p.kind))}});
  }
  return json{{"id", a.id},
              {"name", a.name},
              {"description", a.description},
              {"parameter_schema", std::move(params)},
              {"executor_kind", std::string(to_string(a.executor_kind))},
              {"executor_config", a.executor_config}};
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::validation_failed, "action manifest: " + path + " " + what, json{{"path", path}});
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
    invalid(std::string("$.") + key, "must be a non-empty string");
  }
  return j[key].get<std::string>();
}

}  // namespace

ActionDescriptor from_manifest(const json& j) {
  if (!j.is_object()) invalid("$", "must be an object");
  ActionDescriptor a;
  a.id = required_string(j, "id");
  a.name = required_string(j, "name");
  a.description = required_string(j, "description");
  if (j.contains("parameter_schema")) {
    const auto& ps = j["parameter_schema"];
    if (!ps.is_array()) invalid("$.parameter_schema", "must be an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string path = "$.parameter_schema[" + std::to_string(i) + "]";
      const auto& p = ps[i];
      if (!p.is_object() || !p.contains("label") || !p["label"].is_string() || p["label"].get<std::string>().empty()) {
        invalid(path + ".label", "must be a non-empty string");
      }
      ParameterSpec spec;
      spec.label = p["label"].get<std::string>();
      if (p.contains("required")) {
        if (!p["required"].is_boolean()) invalid(path + ".required", "must be a boolean");
        spec.required = p["required"].get<bool>();
      }
      auto kind = p.contains("kind") && p["kind"].is_string() ? parse_param_kind(p["kind"].get<std::string>())
                                                               : std::nullopt;
      if (!kind) invalid(path + ".kind", "must be one of file|url|text|table");
      spec.kind = *kind;
      a.parameter_schema.push_back(std::move(spec));
    }
  }
  auto ek = j.contains("executor_kind") && j["executor_kind"].is_string()
                ? parse_executor_kind(j["executor_kind"].get<std::string>())
                : std::nullopt;
  if (!ek) invalid("$.executor_kind", "must be one of builtin|http_api|shell-out");
  a.executor_kind = *ek;
  if (j.contains("executor_config")) {
    if (!j["executor_config"].is_object()) invalid("$.executor_config", "must be an object");
    a.executor_config = j["executor_config"];
  }
  return a;
}

std::vector<ActionDescriptor> load_manifest_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) return {};
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ActionDescriptor> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::parse_error, "action manifest " + f.filename().string() + " is not valid JSON");
    }
    out.push_back(from_manifest(j));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ActionDescriptor prepared(ActionDescriptor a) {
  if (a.id.empty() || a.name.empty() || a.description.empty()) {
    throw Error(ErrorCode::validation_failed, "action needs id, name and description");
  }
  a.embedding = embed_text(action_text(a));
  return a;
}

}  // namespace

void ActionPool::add(ActionDescriptor a) {
  a = prepared(std::move(a));
  std::unique_lock lock(mutex_);
  if (find_in(*actions_, a.id)) throw Error(ErrorCode::conflict, "action " + a.id + " already registered");
  auto next = std::make_shared<std::vector<ActionDescriptor>>(*actions_);
  next->push_back(std::move(a));
  actions_ = std::move(next);
}

void ActionPool::upsert(ActionDescriptor a) {
  a = prepared(std::move(a));
  std::unique_lock lock(mutex_);
  auto next = std::make_shared<std::vector<ActionDescriptor>>(*actions_);
  auto it = std::find_if(next->begin(), next->end(), [&](const ActionDescriptor& x) { return x.id == a.id; });
  if (it != next->end()) {
    *it = std::move(a);
  } else {
    next->push_back(std::move(a));
  }
  actions_ = std::move(next);
}

bool ActionPool::remove(const std::string& id) {
  std::unique_lock lock(mutex_);
  auto next = std::make_shared<std::vector<ActionDescriptor>>(*actions_);
  auto it = std::find_if(next->begin(), next->end(), [&](const ActionDescriptor& x) { return x.id == id; });
  if (it == next->end()) return false;
  next->erase(it);
  actions_ = std::move(next);
  return true;
}

PoolSnapshot ActionPool::snapshot() const {
  std::shared_lock lock(mutex_);
  return actions_;
}

std::optional<ActionDescriptor> ActionPool::find(const std::string& id) const {
  auto snap = snapshot();
  if (auto* a = find_in(*snap, id)) return *a;
  return std::nullopt;
}

std::size_t ActionPool::size() const { return snapshot()->size(); }

const ActionDescriptor* find_in(const std::vector<ActionDescriptor>& actions, const std::string& id) {
  for (const auto& a : actions) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

json to_json(const CandidateSet& c) {
  json list = json::array();
  for (const auto& cand : c.candidates) {
    list.push_back(json{{"action_id", cand.action_id}, {"similarity", cand.similarity}});
  }
  return json{{"step_index", c.step_index}, {"candidates", std::move(list)}};
}

std::int64_t ranking_key(double similarity) { return std::llround(std::ldexp(similarity, 40)); }

CandidateSet retrieve(std::string_view step_text, const std::vector<ActionDescriptor>& pool, std::size_t k,
                      std::size_t step_index) {
  if (pool.empty()) throw Error(ErrorCode::empty_pool, "action pool is empty");
  if (k == 0) throw Error(ErrorCode::bad_request, "k must be at least 1");
  const TermCounts q = term_counts(step_text);
  std::uint64_t qnorm2 = 0;
  for (auto c : q) qnorm2 += std::uint64_t{c} * c;
  if (qnorm2 == 0) throw Error(ErrorCode::empty_text, "cannot embed text without words");

  // Cosines are compared exactly on the integer counts: for a fixed query
  // d1/sqrt(n1) > d2/sqrt(n2) iff d1^2 n2 > d2^2 n1.
  struct Scored {
    std::uint64_t dot;
    std::uint64_t norm2;
    const ActionDescriptor* action;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& a : pool) {
    const TermCounts t = term_counts(action_text(a));
    std::uint64_t d = 0;
    std::uint64_t n2 = 0;
    for (std::size_t i = 0; i < kDimension; ++i) {
      d += std::uint64_t{q[i]} * t[i];
      n2 += std::uint64_t{t[i]} * t[i];
    }
    scored.push_back({d, n2, &a});
  }
  const auto before = [](const Scored& x, const Scored& y) {
    using u128 = unsigned __int128;
    const u128 lhs = u128{x.dot} * x.dot * std::max<std::uint64_t>(y.norm2, 1);
    const u128 rhs = u128{y.dot} * y.dot * std::max<std::uint64_t>(x.norm2, 1);
    if (lhs != rhs) return lhs > rhs;
    return x.action->id < y.action->id;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), before);
  CandidateSet out;
  out.step_index = step_index;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scored[i];
    const double sim = s.norm2 == 0 ? 0.0
                                    : static_cast<double>(s.dot) /
                                          std::sqrt(static_cast<double>(qnorm2) * static_cast<double>(s.norm2));
    out.candidates.push_back({s.action->id, sim});
  }
  return out;
}

}  // namespace intentflow::actions
