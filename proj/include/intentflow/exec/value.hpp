#pragma once

#include "intentflow/model/workflow.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace intentflow::exec {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column by case-insensitive name, or npos.
  std::size_t column(std::string_view name) const;
  bool operator==(const Table&) const = default;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// RFC 4180 style: quoted fields, doubled quotes, CRLF or LF. The first
/// record is the header. `delimiter` ',' or '\t'.
Table parse_delimited(std::string_view text, char delimiter = ',');
std::string write_csv(const Table& t);

/// First worksheet of an .xlsx workbook (shared and inline strings,
/// numbers as written). Throws Error(parse_error) on malformed archives.
Table read_xlsx(const std::filesystem::path& path);

/// By extension: .xlsx, .tsv, otherwise CSV.
Table read_table_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// A step input or output while a run is in flight.
struct Value {
  model::OutputKind kind = model::OutputKind::text;
  std::string text;              // text, url
  Table table;                   // table
  std::filesystem::path file;    // file (absolute)

  static Value of_text(std::string s) { return {model::OutputKind::text, std::move(s), {}, {}}; }
  static Value of_url(std::string u) { return {model::OutputKind::url, std::move(u), {}, {}}; }
  static Value of_table(Table t) { return {model::OutputKind::table, {}, std::move(t), {}}; }
  static Value of_file(std::filesystem::path p) { return {model::OutputKind::file, {}, {}, std::move(p)}; }
};

/// Bytes and file extension a value is stored under.
struct Stored {
  std::string bytes;
  std::string extension;
};
Stored encode(const Value& v);

/// Reads a stored output back (by kind and path).
Value decode(model::OutputKind kind, const std::filesystem::path& path);

/// Coercions used by builtins. Errors: executor_failure.
Table as_table(const Value& v);
std::string as_text(const Value& v);

}  // namespace intentflow::exec
