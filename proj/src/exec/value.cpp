#include "intentflow/exec/value.hpp"

#include "intentflow/error.hpp"
#include "intentflow/text/lexicon.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace intentflow::exec {

namespace fs = std::filesystem;

std::size_t Table::column(std::string_view name) const {
  const std::string want = text::to_lower(name);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (text::to_lower(columns[i]) == want) return i;
  }
  return npos;
}

Table parse_delimited(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::parse_error, "unterminated quoted field in table");
  if (field_started || !field.empty() || !record.empty()) end_record();

  Table t;
  if (records.empty()) return t;
  t.columns = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    records[i].resize(t.columns.size());
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

namespace {

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void append_record(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(fields[i]);
  }
  out += "\n";
}

}  // namespace

std::string write_csv(const Table& t) {
  std::string out;
  append_record(out, t.columns);
  for (const auto& r : t.rows) append_record(out, r);
  return out;
}

// ---------------------------------------------------------------------------
// Minimal .xlsx reader: zip central directory + raw deflate via zlib, then
// a scan of the sheet XML.

namespace {

[[noreturn]] void bad_xlsx(const std::string& why) {
  throw Error(ErrorCode::parse_error, "xlsx: " + why);
}

std::uint32_t le32(const std::string& b, std::size_t at) {
  if (at + 4 > b.size()) bad_xlsx("truncated archive");
  std::uint32_t v;
  std::memcpy(&v, b.data() + at, 4);
  return v;
}

std::uint16_t le16(const std::string& b, std::size_t at) {
  if (at + 2 > b.size()) bad_xlsx("truncated archive");
  std::uint16_t v;
  std::memcpy(&v, b.data() + at, 2);
  return v;
}

struct ZipEntry {
  std::uint16_t method = 0;
  std::uint32_t compressed = 0;
  std::uint32_t size = 0;
  std::uint32_t local_offset = 0;
};

std::map<std::string, ZipEntry> zip_directory(const std::string& b) {
  if (b.size() < 22) bad_xlsx("not a zip archive");
  std::size_t eocd = std::string::npos;
  for (std::size_t i = b.size() - 22 + 1; i-- > 0;) {
    if (le32(b, i) == 0x06054b50) {
      eocd = i;
      break;
    }
    if (b.size() - i > 22 + 0xFFFF) break;
  }
  if (eocd == std::string::npos) bad_xlsx("end of central directory not found");
  const std::uint16_t count = le16(b, eocd + 10);
  std::size_t p = le32(b, eocd + 16);
  std::map<std::string, ZipEntry> out;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (le32(b, p) != 0x02014b50) bad_xlsx("bad central directory entry");
    ZipEntry e;
    e.method = le16(b, p + 10);
    e.compressed = le32(b, p + 20);
    e.size = le32(b, p + 24);
    const std::uint16_t name_len = le16(b, p + 28);
    const std::uint16_t extra_len = le16(b, p + 30);
    const std::uint16_t comment_len = le16(b, p + 32);
    e.local_offset = le32(b, p + 42);
    if (p + 46 + name_len > b.size()) bad_xlsx("truncated archive");
    out[b.substr(p + 46, name_len)] = e;
    p += 46 + name_len + extra_len + comment_len;
  }
  return out;
}

std::string zip_read(const std::string& b, const ZipEntry& e) {
  const std::size_t h = e.local_offset;
  if (le32(b, h) != 0x04034b50) bad_xlsx("bad local header");
  const std::size_t data = h + 30 + le16(b, h + 26) + le16(b, h + 28);
  if (data + e.compressed > b.size()) bad_xlsx("truncated entry");
  if (e.method == 0) return b.substr(data, e.compressed);
  if (e.method != 8) bad_xlsx("unsupported compression method");

  std::string out(e.size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) bad_xlsx("inflate init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(b.data() + data));
  zs.avail_in = e.compressed;
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = e.size;
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) bad_xlsx("corrupt deflate stream");
  return out;
}

std::string xml_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos) {
      out.push_back('&');
      continue;
    }
    const std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (!ent.empty() && ent[0] == '#') {
      const unsigned long cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                                   ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                   : std::stoul(std::string(ent.substr(1)));
      if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

/// Concatenated text of every <t>...</t> inside [begin, end).
std::string text_runs(std::string_view xml) {
  std::string out;
  std::size_t p = 0;
  while ((p = xml.find("<t", p)) != std::string_view::npos) {
    const char after = p + 2 < xml.size() ? xml[p + 2] : '\0';
    if (after != '>' && after != ' ') {
      p += 2;
      continue;
    }
    const auto open_end = xml.find('>', p);
    if (open_end == std::string_view::npos) break;
    if (xml[open_end - 1] == '/') {
      p = open_end + 1;
      continue;
    }
    const auto close = xml.find("</t>", open_end);
    if (close == std::string_view::npos) break;
    out += xml_unescape(xml.substr(open_end + 1, close - open_end - 1));
    p = close + 4;
  }
  return out;
}

std::string attribute(std::string_view tag, std::string_view name) {
  const std::string key = " " + std::string(name) + "=\"";
  const auto p = tag.find(key);
  if (p == std::string_view::npos) return {};
  const auto start = p + key.size();
  const auto end = tag.find('"', start);
  return std::string(tag.substr(start, end - start));
}

std::size_t column_index(std::string_view ref) {
  std::size_t col = 0;
  for (char c : ref) {
    if (c < 'A' || c > 'Z') break;
    col = col * 26 + static_cast<std::size_t>(c - 'A' + 1);
  }
  return col == 0 ? 0 : col - 1;
}

}  // namespace

Table read_xlsx(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto dir = zip_directory(bytes);

  std::vector<std::string> shared;
  if (auto it = dir.find("xl/sharedStrings.xml"); it != dir.end()) {
    const std::string xml = zip_read(bytes, it->second);
    std::size_t p = 0;
    while ((p = xml.find("<si", p)) != std::string::npos) {
      const auto end = xml.find("</si>", p);
      if (end == std::string::npos) break;
      shared.push_back(text_runs(std::string_view(xml).substr(p, end - p)));
      p = end + 5;
    }
  }

  std::string sheet_name;
  for (const auto& [name, _] : dir) {
    if (name.rfind("xl/worksheets/sheet", 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".xml") {
      if (sheet_name.empty() || name == "xl/worksheets/sheet1.xml") sheet_name = name;
    }
  }
  if (sheet_name.empty()) bad_xlsx("workbook has no worksheet");
  const std::string xml = zip_read(bytes, dir.at(sheet_name));

  std::vector<std::vector<std::string>> grid;
  std::size_t p = 0;
  while ((p = xml.find("<row", p)) != std::string::npos) {
    const auto row_end = xml.find("</row>", p);
    const auto tag_end = xml.find('>', p);
    if (tag_end == std::string::npos) break;
    if (xml[tag_end - 1] == '/' || row_end == std::string::npos) {
      p = tag_end + 1;
      continue;
    }
    std::vector<std::string> row;
    std::string_view body = std::string_view(xml).substr(tag_end + 1, row_end - tag_end - 1);
    std::size_t c = 0;
    while ((c = body.find("<c", c)) != std::string_view::npos) {
      const auto ctag_end = body.find('>', c);
      if (ctag_end == std::string_view::npos) break;
      const std::string_view tag = body.substr(c, ctag_end - c + 1);
      std::string value;
      std::size_t next = ctag_end + 1;
      if (tag[tag.size() - 2] != '/') {
        const auto cend = body.find("</c>", ctag_end);
        const std::string_view inner = body.substr(ctag_end + 1, cend - ctag_end - 1);
        const std::string type = attribute(tag, "t");
        if (type == "inlineStr") {
          value = text_runs(inner);
        } else {
          const auto v = inner.find("<v>");
          if (v != std::string_view::npos) {
            value = xml_unescape(inner.substr(v + 3, inner.find("</v>", v) - v - 3));
          }
          if (type == "s") {
            const std::size_t idx = std::stoul(value);
            if (idx >= shared.size()) bad_xlsx("shared string index out of range");
            value = shared[idx];
          }
        }
        next = cend + 4;
      }
      const std::string ref = attribute(tag, "r");
      const std::size_t col = ref.empty() ? row.size() : column_index(ref);
      if (row.size() <= col) row.resize(col + 1);
      row[col] = std::move(value);
      c = next;
    }
    grid.push_back(std::move(row));
    p = row_end + 6;
  }

  Table t;
  if (grid.empty()) return t;
  t.columns = std::move(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    grid[i].resize(t.columns.size());
    t.rows.push_back(std::move(grid[i]));
  }
  return t;
}

Table read_table_file(const fs::path& path) {
  const std::string ext = text::to_lower(path.extension().string());
  if (ext == ".xlsx") return read_xlsx(path);
  return parse_delimited(read_file(path), ext == ".tsv" ? '\t' : ',');
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::internal, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::internal, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Stored encode(const Value& v) {
  switch (v.kind) {
    case model::OutputKind::text: return {v.text, ".txt"};
    case model::OutputKind::url: return {v.text + "\n", ".url"};
    case model::OutputKind::table: return {write_csv(v.table), ".csv"};
    case model::OutputKind::file: {
      std::string ext = v.file.extension().string();
      return {read_file(v.file), ext.empty() ? ".bin" : ext};
    }
  }
  return {v.text, ".txt"};
}

Value decode(model::OutputKind kind, const fs::path& path) {
  switch (kind) {
    case model::OutputKind::text: return Value::of_text(read_file(path));
    case model::OutputKind::url: return Value::of_url(text::trim(read_file(path)));
    case model::OutputKind::table: return Value::of_table(read_table_file(path));
    case model::OutputKind::file: return Value::of_file(path);
  }
  return Value::of_file(path);
}

Table as_table(const Value& v) {
  switch (v.kind) {
    case model::OutputKind::table: return v.table;
    case model::OutputKind::file: return read_table_file(v.file);
    case model::OutputKind::text: return parse_delimited(v.text);
    case model::OutputKind::url: {
      Table t;
      t.columns = {"url"};
      t.rows.push_back({v.text});
      return t;
    }
  }
  throw Error(ErrorCode::executor_failure, "value is not a table");
}

std::string as_text(const Value& v) {
  switch (v.kind) {
    case model::OutputKind::text:
    case model::OutputKind::url: return v.text;
    case model::OutputKind::table: return write_csv(v.table);
    case model::OutputKind::file: return read_file(v.file);
  }
  return v.text;
}

}  // namespace intentflow::exec
