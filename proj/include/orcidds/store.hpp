#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace orcidds {

using Row = std::vector<std::string>;

namespace csv {

/// RFC-4180 quoting: fields with comma, quote, CR or LF are quoted.
std::string escape(std::string_view field);
/// Fields joined with ',' and terminated with '\n'.
std::string format_row(std::span<const std::string> fields);
std::vector<std::string> split_list(std::string_view s, char sep);

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  /// Next non-blank record; false at end of input. Throws SchemaError on an
  /// unterminated quoted field.
  bool next(Row& row);
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace csv

enum class ColumnType { Text, Int, OptionalInt, Bool, OptionalReal };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::size_t> key;  // sort order; ties broken by the full row

  std::vector<std::string> header() const;
  std::size_t index_of(std::string_view column) const;
};

/// Declared schema of a pipeline stage table (profiles, works, affiliations,
/// datasets, producers, country_links, careers, disciplines). Throws
/// SchemaError for an unknown name.
const TableSchema& stage_schema(std::string_view name);
std::span<const std::string> stage_table_names();

std::filesystem::path table_path(const std::filesystem::path& dir, const TableSchema& schema);

/// Accumulates rows for one stage table; sorted runs spill to disk once the
/// buffer passes `max_buffered_bytes` and are merged by finish().
class TableWriter {
 public:
  TableWriter(std::filesystem::path dir, const TableSchema& schema, std::size_t max_buffered_bytes = 32u << 20);
  ~TableWriter();
  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;

  /// Throws SchemaError on a row that does not fit the schema.
  void add(Row row);
  std::size_t rows() const { return rows_; }
  std::size_t spilled_runs() const { return runs_.size(); }
  /// Sorted, atomic write of everything added. Throws IoError.
  std::filesystem::path finish();

 private:
  void spill();

  std::filesystem::path dir_;
  const TableSchema& schema_;
  std::size_t max_bytes_;
  std::size_t rows_ = 0;
  std::size_t buffered_bytes_ = 0;
  std::vector<Row> buffer_;
  std::vector<std::filesystem::path> runs_;
};

/// Validates, sorts by key and writes atomically (temp file + rename).
/// Throws IoError / SchemaError.
std::filesystem::path write_table(const std::filesystem::path& dir, const TableSchema& schema,
                                  std::vector<Row> rows);

/// Throws MissingTable when absent, SchemaError on header or cell mismatch.
std::vector<Row> read_table(const std::filesystem::path& dir, const TableSchema& schema);

/// Writes bytes to path via a temp file + rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace orcidds
