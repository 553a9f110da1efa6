#include "orcidds/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <memory>

#include "orcidds/model.hpp"

namespace fs = std::filesystem;

namespace orcidds {

namespace csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(std::span<const std::string> fields) {
  if (fields.size() == 1 && fields[0].empty()) return "\"\"\n";
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += escape(fields[i]);
  }
  line.push_back('\n');
  return line;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

bool Reader::next(Row& row) {
  row.clear();
  std::string field;
  bool in_quotes = false;
  bool quoted = false;
  bool any = false;
  int ch;
  while ((ch = in_.get()) != std::char_traits<char>::eof()) {
    char c = static_cast<char>(ch);
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') line_++;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      line_++;
      if (row.empty() && field.empty() && !quoted) {
        any = false;  // blank line
        continue;
      }
      row.push_back(std::move(field));
      return true;
    } else if (c == '\r' && in_.peek() == '\n') {
      continue;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw Error(ErrorCode::SchemaError, "unterminated quoted field at line " + std::to_string(line_ + 1));
  if (!any || (row.empty() && field.empty() && !quoted)) return false;
  line_++;
  row.push_back(std::move(field));
  return true;
}

}  // namespace csv

namespace {

TableSchema make(std::string name, std::vector<Column> cols, std::vector<std::size_t> key) {
  return TableSchema{std::move(name), std::move(cols), std::move(key)};
}

using CT = ColumnType;

const std::vector<TableSchema>& schemas() {
  static const std::vector<TableSchema> all = {
      make("profiles", {{"orcid_id", CT::Text}}, {0}),
      make("works",
           {{"orcid_id", CT::Text}, {"put_code", CT::Text}, {"work_type", CT::Text}, {"doi", CT::Text},
            {"source_name", CT::Text}, {"pub_year", CT::OptionalInt}},
           {0, 1}),
      make("affiliations",
           {{"orcid_id", CT::Text}, {"section", CT::Text}, {"country", CT::Text}, {"role_title", CT::Text},
            {"start_year", CT::OptionalInt}, {"end_year", CT::OptionalInt}},
           {0}),
      make("datasets",
           {{"orcid_id", CT::Text}, {"put_code", CT::Text}, {"doi", CT::Text}, {"repository", CT::Text},
            {"source", CT::Text}, {"scenario", CT::Text}, {"in_scope", CT::Bool}},
           {0, 1}),
      make("producers", {{"orcid_id", CT::Text}, {"in_scope_datasets", CT::Int}}, {0}),
      make("country_links",
           {{"orcid_id", CT::Text}, {"country", CT::Text}, {"is_producer", CT::Bool}, {"iso_valid", CT::Bool},
            {"entries", CT::Int}},
           {0, 1}),
      make("careers",
           {{"orcid_id", CT::Text}, {"is_producer", CT::Bool}, {"phd_start_year", CT::OptionalInt},
            {"first_dataset_year", CT::OptionalInt}, {"first_article_year", CT::OptionalInt}},
           {0}),
      make("disciplines",
           {{"orcid_id", CT::Text}, {"matched_articles", CT::Int}, {"weights", CT::Text},
            {"modal_domain", CT::Text}, {"tied", CT::Bool}},
           {0}),
  };
  return all;
}

bool parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

bool cell_ok(ColumnType type, std::string_view cell) {
  switch (type) {
    case ColumnType::Text: return true;
    case ColumnType::Int: return parse_int(cell);
    case ColumnType::OptionalInt: return cell.empty() || parse_int(cell);
    case ColumnType::Bool: return cell == "0" || cell == "1";
    case ColumnType::OptionalReal: return cell.empty() || parse_real(cell);
  }
  return false;
}

void validate_row(const TableSchema& schema, const Row& row, std::size_t index) {
  if (row.size() != schema.columns.size())
    throw Error(ErrorCode::SchemaError, schema.name + " row " + std::to_string(index) + " has " +
                                            std::to_string(row.size()) + " cells, expected " +
                                            std::to_string(schema.columns.size()));
  for (std::size_t i = 0; i < row.size(); ++i)
    if (!cell_ok(schema.columns[i].type, row[i]))
      throw Error(ErrorCode::SchemaError, schema.name + " row " + std::to_string(index) + " column " +
                                              schema.columns[i].name + ": bad value '" + row[i] + "'");
}

}  // namespace

std::vector<std::string> TableSchema::header() const {
  std::vector<std::string> h;
  for (const auto& c : columns) h.push_back(c.name);
  return h;
}

std::size_t TableSchema::index_of(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return i;
  throw Error(ErrorCode::SchemaError, name + " has no column " + std::string(column));
}

const TableSchema& stage_schema(std::string_view name) {
  for (const auto& s : schemas())
    if (s.name == name) return s;
  throw Error(ErrorCode::SchemaError, "unknown stage table " + std::string(name));
}

std::span<const std::string> stage_table_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : schemas()) n.push_back(s.name);
    return n;
  }();
  return names;
}

fs::path table_path(const fs::path& dir, const TableSchema& schema) { return dir / (schema.name + ".csv"); }

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

namespace {

struct RowLess {
  const TableSchema* schema;
  bool operator()(const Row& a, const Row& b) const {
    for (auto k : schema->key)
      if (a[k] != b[k]) return a[k] < b[k];
    return a < b;
  }
};

std::size_t footprint(const Row& row) {
  std::size_t n = sizeof(Row) + row.capacity() * sizeof(std::string);
  for (const auto& f : row) n += f.capacity() > 15 ? f.capacity() + 1 : 0;
  return n;
}

fs::path temp_sibling(const fs::path& path, const std::string& tag) {
  fs::path tmp = path;
  tmp += "." + tag + "." + std::to_string(::getpid());
  return tmp;
}

}  // namespace

TableWriter::TableWriter(fs::path dir, const TableSchema& schema, std::size_t max_buffered_bytes)
    : dir_(std::move(dir)), schema_(schema), max_bytes_(max_buffered_bytes) {}

TableWriter::~TableWriter() {
  std::error_code ec;
  for (const auto& r : runs_) fs::remove(r, ec);
}

void TableWriter::add(Row row) {
  validate_row(schema_, row, rows_);
  rows_++;
  buffered_bytes_ += footprint(row);
  buffer_.push_back(std::move(row));
  if (buffered_bytes_ >= max_bytes_) spill();
}

void TableWriter::spill() {
  std::sort(buffer_.begin(), buffer_.end(), RowLess{&schema_});
  std::error_code ec;
  fs::create_directories(dir_, ec);
  auto run = temp_sibling(table_path(dir_, schema_), "run" + std::to_string(runs_.size()));
  {
    std::ofstream out(run, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + run.string());
    for (const auto& r : buffer_) out << csv::format_row(r);
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + run.string());
  }
  runs_.push_back(run);
  buffer_.clear();
  buffer_.shrink_to_fit();
  buffered_bytes_ = 0;
}

fs::path TableWriter::finish() {
  auto path = table_path(dir_, schema_);
  RowLess less{&schema_};
  if (runs_.empty()) {
    std::sort(buffer_.begin(), buffer_.end(), less);
    std::string body = csv::format_row(schema_.header());
    for (const auto& r : buffer_) body += csv::format_row(r);
    write_file_atomic(path, body);
    buffer_.clear();
    return path;
  }
  if (!buffer_.empty()) spill();

  // k-way merge of the sorted runs
  std::vector<std::unique_ptr<std::ifstream>> files;
  std::vector<std::unique_ptr<csv::Reader>> readers;
  std::vector<Row> heads(runs_.size());
  auto later = [&](std::size_t a, std::size_t b) { return less(heads[b], heads[a]); };
  std::vector<std::size_t> heap;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    files.push_back(std::make_unique<std::ifstream>(runs_[i], std::ios::binary));
    readers.push_back(std::make_unique<csv::Reader>(*files.back()));
    if (readers.back()->next(heads[i])) heap.push_back(i);
  }
  std::make_heap(heap.begin(), heap.end(), later);

  auto tmp = temp_sibling(path, "tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << csv::format_row(schema_.header());
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), later);
      std::size_t i = heap.back();
      out << csv::format_row(heads[i]);
      if (readers[i]->next(heads[i]))
        std::push_heap(heap.begin(), heap.end(), later);
      else
        heap.pop_back();
    }
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
  files.clear();
  for (const auto& r : runs_) fs::remove(r, ec);
  runs_.clear();
  return path;
}

fs::path write_table(const fs::path& dir, const TableSchema& schema, std::vector<Row> rows) {
  TableWriter writer(dir, schema);
  for (auto& r : rows) writer.add(std::move(r));
  return writer.finish();
}

std::vector<Row> read_table(const fs::path& dir, const TableSchema& schema) {
  auto path = table_path(dir, schema);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingTable, "missing table '" + schema.name + "' (" + path.string() + ")");
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  }
  csv::Reader reader(in);
  Row header;
  if (!reader.next(header) || header != schema.header())
    throw Error(ErrorCode::SchemaError, path.string() + ": header does not match schema '" + schema.name + "'");
  std::vector<Row> rows;
  for (Row row; reader.next(row);) {
    validate_row(schema, row, rows.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace orcidds
