#include "intentflow/exec/builtins.hpp"

#include "intentflow/error.hpp"
#include "intentflow/text/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <regex>
#include <sys/wait.h>

namespace intentflow::exec {

namespace fs = std::filesystem;
using nlohmann::json;
using model::OutputKind;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::executor_failure, msg); }

const Value* first_value(const std::vector<Arg>& args, std::initializer_list<actions::ParamKind> kinds = {}) {
  for (const auto& a : args) {
    if (!a.value) continue;
    if (kinds.size() == 0 || std::find(kinds.begin(), kinds.end(), a.spec.kind) != kinds.end()) return &*a.value;
  }
  return nullptr;
}

const Value& require_value(const std::vector<Arg>& args, std::initializer_list<actions::ParamKind> kinds,
                           const char* what) {
  if (const Value* v = first_value(args, kinds)) return *v;
  if (const Value* v = first_value(args)) return *v;
  fail(std::string("missing input: ") + what);
}

/// Text argument whose label mentions one of `words`.
std::optional<std::string> text_arg(const std::vector<Arg>& args, std::initializer_list<std::string_view> words) {
  for (const auto& a : args) {
    if (!a.value || a.spec.kind != actions::ParamKind::text) continue;
    const std::string label = text::to_lower(a.spec.label);
    for (auto w : words) {
      if (label.find(w) != std::string::npos) return as_text(*a.value);
    }
  }
  return std::nullopt;
}

bool is_remote(std::string_view url) { return url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0; }

std::string file_name_from_url(std::string_view url, std::string_view fallback) {
  auto cut = url.find_first_of("?#");
  std::string_view path = url.substr(0, cut);
  const auto scheme = path.find("://");
  if (scheme != std::string_view::npos) path.remove_prefix(scheme + 3);
  const auto slash = path.rfind('/');
  std::string name(slash == std::string_view::npos ? std::string_view{} : path.substr(slash + 1));
  if (name.empty() || name.find('.') == std::string::npos) return std::string(fallback);
  return name;
}

/// Brings a URL's bytes into the work directory.
fs::path fetch_to_file(const std::string& url, const BuiltinContext& ctx) {
  std::string bytes;
  if (url.rfind("file://", 0) == 0) {
    bytes = read_file(url.substr(7));
  } else if (is_remote(url)) {
    if (!ctx.http.get) fail("no HTTP client configured for " + url);
    bytes = ctx.http.get(url);
  } else {
    bytes = read_file(url);
  }
  const fs::path out = ctx.work_dir / file_name_from_url(url, "page.html");
  write_file_atomic(out, bytes);
  return out;
}

Table table_of(const Value& v, const BuiltinContext& ctx) {
  if (v.kind == OutputKind::url && !v.text.empty()) {
    const std::string name = file_name_from_url(v.text, "");
    const std::string ext = text::to_lower(fs::path(name).extension().string());
    if (ext == ".csv" || ext == ".tsv" || ext == ".xlsx") return read_table_file(fetch_to_file(v.text, ctx));
  }
  return as_table(v);
}

// ---------------------------------------------------------------------------

Value echo(const std::vector<Arg>& args, const BuiltinContext&) {
  return Value::of_text(as_text(require_value(args, {actions::ParamKind::text}, "text")));
}

Value fetch_url(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {actions::ParamKind::url}, "url");
  return Value::of_file(fetch_to_file(text::trim(as_text(v)), ctx));
}

Value read_table(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {actions::ParamKind::file, actions::ParamKind::table}, "table file");
  return Value::of_table(table_of(v, ctx));
}

Value filter_table(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {actions::ParamKind::table, actions::ParamKind::file}, "table");
  auto condition = text_arg(args, {"condition", "rule", "predicate", "criteri", "filter"});
  if (!condition) fail("filter_table needs a condition");
  return Value::of_table(filter_rows(table_of(v, ctx), *condition));
}

std::string markdown_table(const Table& t) {
  std::string out = "|";
  for (const auto& c : t.columns) out += " " + c + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : t.rows) {
    out += "|";
    for (const auto& f : r) out += " " + f + " |";
    out += "\n";
  }
  return out;
}

Value compose_document(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {actions::ParamKind::table, actions::ParamKind::file}, "content");
  const std::string body = v.kind == OutputKind::table || v.kind == OutputKind::file
                               ? markdown_table(table_of(v, ctx))
                               : as_text(v);
  std::string doc = text_arg(args, {"template", "format"}).value_or("# Document\n\n{content}");
  const auto at = doc.find("{content}");
  if (at == std::string::npos) {
    doc += "\n\n" + body;
  } else {
    doc.replace(at, 9, body);
  }
  if (doc.empty() || doc.back() != '\n') doc += "\n";
  const fs::path out = ctx.work_dir / "document.md";
  write_file_atomic(out, doc);
  return Value::of_file(out);
}

Value send_email(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& body_value = require_value(args, {actions::ParamKind::file, actions::ParamKind::table}, "attachment");
  std::string to = text_arg(args, {"recipient", "to", "address"}).value_or("");
  if (to.empty()) to = ctx.config.value("default_recipient", std::string("user@localhost"));
  const std::string subject = text_arg(args, {"subject"}).value_or(ctx.config.value("subject", std::string("Workflow results")));
  const std::string body = as_text(body_value);
  std::string message = "To: " + to + "\r\nSubject: " + subject +
                        "\r\nContent-Type: text/plain; charset=utf-8\r\n\r\n" + body;
  if (message.size() < 2 || message.substr(message.size() - 2) != "\r\n") message += "\r\n";
  const fs::path file = ctx.outbox / (ctx.run_id + "-" + std::to_string(ctx.event_seq) + ".eml");
  write_file_atomic(file, message);
  return Value::of_text("sent to " + to + ": " + subject);
}

Value download(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {}, "content");
  if (v.kind == OutputKind::url) return Value::of_file(fetch_to_file(v.text, ctx));
  const Stored s = encode(v);
  const fs::path out = ctx.work_dir / ("download" + s.extension);
  write_file_atomic(out, s.bytes);
  return Value::of_file(out);
}

Value translate(const std::vector<Arg>& args, const BuiltinContext&) {
  auto language = text_arg(args, {"language", "target"});
  if (!language) fail("translate needs a target language");
  const Value* source = nullptr;
  for (const auto& a : args) {
    const std::string label = text::to_lower(a.spec.label);
    if (a.value && label.find("language") == std::string::npos) {
      source = &*a.value;
      break;
    }
  }
  if (!source) fail("translate needs text");
  return Value::of_text(dictionary_translate(as_text(*source), *language));
}

Value summarize(const std::vector<Arg>& args, const BuiltinContext&) {
  return Value::of_text(truncate_summary(as_text(require_value(args, {}, "content"))));
}

std::map<std::string, bool> detection_answers(const BuiltinContext& ctx) {
  json answers;
  if (ctx.config.contains("answers")) {
    answers = ctx.config["answers"];
  } else {
    fs::path file = ctx.config.value("answers_file", std::string("fixtures/person_detection.json"));
    if (file.is_relative()) file = ctx.data_dir / file;
    answers = json::parse(read_file(file), nullptr, false);
    if (answers.is_discarded()) fail("person detection answers are not valid JSON");
  }
  if (!answers.is_object()) fail("person detection answers must map URL to true/false");
  std::map<std::string, bool> out;
  for (auto it = answers.begin(); it != answers.end(); ++it) {
    if (!it.value().is_boolean()) fail("person detection answer for " + it.key() + " must be a boolean");
    out[it.key()] = it.value().get<bool>();
  }
  return out;
}

std::size_t url_column(const Table& t) {
  for (const char* name : {"url", "image_url", "image_link", "link", "image", "urls", "image url"}) {
    if (auto c = t.column(name); c != npos) return c;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (!t.rows.empty() && is_remote(t.rows.front()[c])) return c;
  }
  return npos;
}

/// Stand-in for a person detector: answers come from a fixture table
/// keyed by image URL.
Value person_detection_stub(const std::vector<Arg>& args, const BuiltinContext& ctx) {
  const Value& v = require_value(args, {actions::ParamKind::table, actions::ParamKind::file}, "images");
  Table t = table_of(v, ctx);
  const std::size_t col = url_column(t);
  if (col == npos) fail("no image URL column in table");
  const auto answers = detection_answers(ctx);
  t.columns.push_back(ctx.config.value("column", std::string("person")));
  for (auto& row : t.rows) {
    auto it = answers.find(row[col]);
    if (it == answers.end()) fail("no detection answer for " + row[col]);
    row.push_back(it->second ? "O" : "X");
  }
  return Value::of_table(std::move(t));
}

}  // namespace

const std::map<std::string, Builtin>& builtins() {
  static const std::map<std::string, Builtin> table{
      {"echo", echo},
      {"fetch_url", fetch_url},
      {"read_table", read_table},
      {"filter_table", filter_table},
      {"compose_document", compose_document},
      {"send_email", send_email},
      {"download", download},
      {"translate", translate},
      {"summarize", summarize},
      {"person_detection_stub", person_detection_stub},
  };
  return table;
}

Table filter_rows(const Table& t, std::string_view condition) {
  static const std::regex re(R"(^\s*(.+?)\s*(!=|==|=|\bcontains\b|\bis not\b|\bis\b)\s*(.+?)\s*$)",
                             std::regex::icase);
  std::cmatch m;
  const std::string cond(condition);
  if (!std::regex_match(cond.c_str(), m, re)) fail("cannot parse filter condition \"" + cond + "\"");
  const std::string column = m[1].str();
  const std::string op = text::to_lower(m[2].str());
  std::string value = m[3].str();
  if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
    value = value.substr(1, value.size() - 2);
  }
  const std::size_t c = t.column(column);
  if (c == npos) fail("no column named \"" + column + "\"");
  Table out;
  out.columns = t.columns;
  for (const auto& row : t.rows) {
    const std::string& cell = row[c];
    bool keep = false;
    const std::string lower = text::to_lower(cell);
    if (op == "contains") keep = lower.find(text::to_lower(value)) != std::string::npos;
    else if (op == "!=" || op == "is not") keep = lower != text::to_lower(value);
    else keep = lower == text::to_lower(value);
    if (keep) out.rows.push_back(row);
  }
  return out;
}

std::string dictionary_translate(std::string_view input, std::string_view language) {
  using Entry = std::array<const char*, 5>;  // english, korean, spanish, french, german
  static const std::vector<Entry> dictionary{
      {"hello", "안녕하세요", "hola", "bonjour", "hallo"},
      {"meeting", "회의", "reunión", "réunion", "besprechung"},
      {"minutes", "회의록", "acta", "procès-verbal", "protokoll"},
      {"summary", "요약", "resumen", "résumé", "zusammenfassung"},
      {"image", "이미지", "imagen", "image", "bild"},
      {"images", "이미지", "imágenes", "images", "bilder"},
      {"person", "사람", "persona", "personne", "person"},
      {"people", "사람들", "personas", "personnes", "menschen"},
      {"result", "결과", "resultado", "résultat", "ergebnis"},
      {"results", "결과", "resultados", "résultats", "ergebnisse"},
      {"report", "보고서", "informe", "rapport", "bericht"},
      {"today", "오늘", "hoy", "aujourd'hui", "heute"},
      {"thank", "감사", "gracias", "merci", "danke"},
      {"you", "당신", "usted", "vous", "sie"},
      {"yes", "예", "sí", "oui", "ja"},
      {"no", "아니요", "no", "non", "nein"},
      {"and", "그리고", "y", "et", "und"},
      {"the", "", "el", "le", "der"},
      {"email", "이메일", "correo", "courriel", "e-mail"},
      {"review", "검토", "revisión", "examen", "prüfung"},
      {"action", "조치", "acción", "action", "aktion"},
      {"items", "항목", "elementos", "éléments", "punkte"},
  };
  const std::string lang = text::to_lower(text::trim(language));
  std::size_t col = 0;
  if (lang == "korean" || lang == "ko") col = 1;
  else if (lang == "spanish" || lang == "es") col = 2;
  else if (lang == "french" || lang == "fr") col = 3;
  else if (lang == "german" || lang == "de") col = 4;
  else if (lang == "english" || lang == "en") return std::string(input);
  else fail("no dictionary for language \"" + std::string(language) + "\"");

  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    const std::string lower = text::to_lower(word);
    auto it = std::find_if(dictionary.begin(), dictionary.end(), [&](const Entry& e) { return lower == e[0]; });
    out += it == dictionary.end() ? word : std::string((*it)[col]);
    word.clear();
  };
  for (char ch : input) {
    if (std::isalpha(static_cast<unsigned char>(ch)) || (static_cast<unsigned char>(ch) & 0x80)) {
      word.push_back(ch);
    } else {
      flush();
      out.push_back(ch);
    }
  }
  flush();
  return out;
}

std::string truncate_summary(std::string_view text_in) {
  const std::string text = text::collapse_whitespace(text_in);
  std::size_t sentences = 0;
  std::size_t cut = text.size();
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text[i + 1] == ' ')) {
      if (++sentences == 3) {
        cut = i + 1;
        break;
      }
    }
  }
  cut = std::min<std::size_t>(cut, 400);
  return text.substr(0, cut);
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out += "'";
  return out;
}

std::string arg_string(const Value& v) {
  switch (v.kind) {
    case OutputKind::file: return v.file.string();
    case OutputKind::table: return write_csv(v.table);
    default: return v.text;
  }
}

}  // namespace

std::string run_command(const std::string& command_template, const std::vector<Arg>& args,
                        const fs::path& work_dir) {
  std::string cmd = command_template;
  for (const auto& a : args) {
    const std::string key = "{" + a.spec.label + "}";
    const std::string val = a.value ? shell_quote(arg_string(*a.value)) : "''";
    for (auto p = cmd.find(key); p != std::string::npos; p = cmd.find(key, p + val.size())) cmd.replace(p, key.size(), val);
  }
  fs::create_directories(work_dir);
  const std::string full = "cd " + shell_quote(work_dir.string()) + " && " + cmd;
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) fail("cannot start command");
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    fail("command exited with status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  return out;
}

}  // namespace intentflow::exec
