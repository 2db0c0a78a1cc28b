#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <string_view>

#include "granimpute/table.hpp"

namespace granimpute {

enum class TableFormat { csv, arff };

// Tokens (case-insensitive, whitespace-trimmed) that mark a missing cell.
class MissingTokenSet {
 public:
  MissingTokenSet();  // defaults: "", "?", "NaN", "na"
  explicit MissingTokenSet(const std::vector<std::string>& tokens);
  bool matches(std::string_view token) const;

 private:
  std::set<std::string> lowered_;
};

// Loads a table from CSV (RFC-4180-style, header row mandatory) or from the
// ARFF subset: @relation, @attribute with numeric/real/integer or a nominal
// {a,b,c} spec, and comma-separated @data rows. Sparse ARFF is rejected.
//
// CSV column kinds are inferred: numeric when every non-missing cell parses
// as a finite real, categorical otherwise. A column named "class"
// (case-insensitive) is designated the label when present.
Table load_table(std::istream& in, TableFormat format,
                 const MissingTokenSet& missing = MissingTokenSet());

Table load_table_file(const std::string& path,
                      const MissingTokenSet& missing = MissingTokenSet());

TableFormat format_from_path(const std::string& path);

// CSV emission; missing cells become empty fields, numbers are shortest
// round-trip decimals.
void write_csv(const Table& t, std::ostream& out);
void write_csv_file(const Table& t, const std::string& path);

}  // namespace granimpute
