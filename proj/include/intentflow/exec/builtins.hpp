#pragma once

#include "intentflow/actions/pool.hpp"
#include "intentflow/exec/value.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace intentflow::exec {

/// Network access used by fetch_url and http_api actions; injectable so
/// tests stay offline.
struct HttpHooks {
  std::function<std::string(const std::string& url)> get;
  std::function<std::string(const std::string& url, const std::string& json_body)> post_json;
};

/// httplib-backed hooks (http and https).
HttpHooks default_http_hooks();

struct Arg {
  actions::ParameterSpec spec;
  std::optional<Value> value;
};

struct BuiltinContext {
  std::string run_id;
  std::size_t step_index = 0;
  /// seq of the step_started event; names outbox files.
  std::uint64_t event_seq = 0;
  std::filesystem::path work_dir;
  std::filesystem::path data_dir;
  std::filesystem::path outbox;
  nlohmann::json config = nlohmann::json::object();
  HttpHooks http;
};

using Builtin = std::function<Value(const std::vector<Arg>& args, const BuiltinContext& ctx)>;

/// echo, fetch_url, read_table, filter_table, compose_document, send_email,
/// download, translate, summarize, person_detection_stub.
const std::map<std::string, Builtin>& builtins();

/// Filter predicate grammar: "<column> = <value>", "<column> != <value>",
/// "<column> contains <value>", "<column> is <value>".
Table filter_rows(const Table& t, std::string_view condition);

/// Word-by-word dictionary translation; unknown words pass through.
/// Errors: executor_failure for an unsupported language.
std::string dictionary_translate(std::string_view text, std::string_view language);

/// Leading sentences up to three sentences or 400 characters.
std::string truncate_summary(std::string_view text);

/// Runs a shell-out command template with {label} placeholders replaced
/// by shell-quoted argument values, inside `work_dir`. Returns stdout.
std::string run_command(const std::string& command_template, const std::vector<Arg>& args,
                        const std::filesystem::path& work_dir);

}  // namespace intentflow::exec
