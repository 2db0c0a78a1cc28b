#include "granimpute/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "granimpute/common.hpp"

namespace granimpute {

MissingTokenSet::MissingTokenSet() : MissingTokenSet({"", "?", "NaN", "na"}) {}

MissingTokenSet::MissingTokenSet(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) lowered_.insert(to_lower(trim(t)));
}

bool MissingTokenSet::matches(std::string_view token) const {
  return lowered_.count(to_lower(trim(token))) > 0;
}

namespace {

constexpr std::string_view kLabelName = "class";

// RFC-4180 field splitter: quoted fields, doubled-quote escapes, embedded
// newlines inside quotes. Returns one row per record.
std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  char ch;
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          field.clear();
          records.push_back(std::move(row));
          row.clear();
          row_started = false;
        }
        break;
      default:
        field.push_back(ch);
        row_started = true;
        break;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted CSV field");
  if (row_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  return records;
}

void assign_label_by_name(Table& t) {
  for (size_t c = 0; c < t.columns.size(); ++c) {
    if (to_lower(t.columns[c].name) == kLabelName) {
      t.label_col = static_cast<int>(c);
      return;
    }
  }
}

Table load_csv(std::istream& in, const MissingTokenSet& missing) {
  auto records = parse_csv_records(in);
  if (records.empty()) throw DataError("empty CSV stream");
  const auto& header = records.front();
  if (header.empty()) throw DataError("malformed CSV header");
  std::set<std::string> seen;
  Table t;
  for (const auto& name : header) {
    const std::string trimmed = trim(name);
    if (trimmed.empty()) throw DataError("empty column name in CSV header");
    if (!seen.insert(trimmed).second) {
      throw DataError("duplicate column name in CSV header: " + trimmed);
    }
    Column col;
    col.name = trimmed;
    t.columns.push_back(std::move(col));
  }
  const size_t d = t.columns.size();
  const size_t n = records.size() - 1;
  if (n == 0) throw DataError("CSV has a header but no data rows");
  t.n_data_rows = n;

  for (auto& col : t.columns) {
    col.tokens.resize(n);
    col.missing.assign(n, 0);
  }
  for (size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.size() != d) {
      throw DataError("ragged CSV row " + std::to_string(r + 2) + ": expected " +
                      std::to_string(d) + " fields, got " +
                      std::to_string(rec.size()));
    }
    for (size_t c = 0; c < d; ++c) {
      if (missing.matches(rec[c])) {
        t.columns[c].missing[r] = 1;
      } else {
        t.columns[c].tokens[r] = trim(rec[c]);
      }
    }
  }

  // Kind inference: numeric iff every non-missing cell parses as a finite
  // real. A fully-missing column counts as numeric.
  for (auto& col : t.columns) {
    bool numeric = true;
    for (size_t r = 0; r < n && numeric; ++r) {
      if (col.missing[r]) continue;
      double v = 0.0;
      numeric = parse_double(col.tokens[r], v);
    }
    if (numeric) {
      col.kind = FeatureKind::numeric;
      col.values.assign(n, std::numeric_limits<double>::quiet_NaN());
      for (size_t r = 0; r < n; ++r) {
        if (!col.missing[r]) {
          parse_double(col.tokens[r], col.values[r]);
        }
      }
      col.tokens.clear();
    } else {
      col.kind = FeatureKind::categorical;
      col.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    }
  }
  assign_label_by_name(t);
  return t;
}

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::set<std::string> domain;  // nominal only
};

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"'))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

ArffAttribute parse_attribute_line(const std::string& rest) {
  // rest = "<name> <type>", name possibly quoted.
  std::string body = trim(rest);
  if (body.empty()) throw DataError("malformed @attribute line");
  std::string name;
  size_t pos = 0;
  if (body[0] == '\'' || body[0] == '"') {
    const char q = body[0];
    const size_t end = body.find(q, 1);
    if (end == std::string::npos) throw DataError("unterminated attribute name");
    name = body.substr(1, end - 1);
    pos = end + 1;
  } else {
    const size_t end = body.find_first_of(" \t");
    if (end == std::string::npos) {
      throw DataError("attribute without a type: " + body);
    }
    name = body.substr(0, end);
    pos = end;
  }
  const std::string type = trim(body.substr(pos));
  if (type.empty()) throw DataError("attribute without a type: " + name);

  ArffAttribute attr;
  attr.name = name;
  if (type.front() == '{') {
    if (type.back() != '}') throw DataError("unterminated nominal spec: " + name);
    attr.nominal = true;
    std::stringstream ss(type.substr(1, type.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      attr.domain.insert(strip_quotes(trim(tok)));
    }
    if (attr.domain.empty()) throw DataError("empty nominal domain: " + name);
  } else {
    const std::string lt = to_lower(type);
    if (lt != "numeric" && lt != "real" && lt != "integer") {
      throw DataError("unknown ARFF attribute type '" + type + "' for " + name);
    }
  }
  return attr;
}

Table load_arff(std::istream& in, const MissingTokenSet& missing) {
  std::vector<ArffAttribute> attrs;
  std::vector<std::vector<std::string>> data;
  bool in_data = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '%') continue;
    if (!in_data && stripped[0] == '@') {
      const size_t sp = stripped.find_first_of(" \t");
      const std::string keyword =
          to_lower(sp == std::string::npos ? stripped : stripped.substr(0, sp));
      const std::string rest =
          sp == std::string::npos ? std::string() : stripped.substr(sp + 1);
      if (keyword == "@relation") continue;
      if (keyword == "@attribute") {
        attrs.push_back(parse_attribute_line(rest));
        continue;
      }
      if (keyword == "@data") {
        in_data = true;
        continue;
      }
      throw DataError("unknown ARFF declaration at line " +
                      std::to_string(line_no) + ": " + keyword);
    }
    if (!in_data) {
      throw DataError("data before @data section at line " +
                      std::to_string(line_no));
    }
    if (stripped[0] == '{') {
      throw DataError("sparse ARFF is not supported (line " +
                      std::to_string(line_no) + ")");
    }
    std::vector<std::string> row;
    std::stringstream ss(stripped);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(tok);
    if (!stripped.empty() && stripped.back() == ',') row.emplace_back();
    if (row.size() != attrs.size()) {
      throw DataError("ragged ARFF row at line " + std::to_string(line_no) +
                      ": expected " + std::to_string(attrs.size()) +
                      " values, got " + std::to_string(row.size()));
    }
    data.push_back(std::move(row));
  }
  if (attrs.empty()) throw DataError("ARFF stream has no attributes");
  if (data.empty()) throw DataError("ARFF stream has no data rows");

  Table t;
  t.n_data_rows = data.size();
  std::set<std::string> seen;
  for (const auto& attr : attrs) {
    if (!seen.insert(attr.name).second) {
      throw DataError("duplicate attribute name: " + attr.name);
    }
    Column col;
    col.name = attr.name;
    col.kind = attr.nominal ? FeatureKind::categorical : FeatureKind::numeric;
    col.values.assign(t.n_data_rows, std::numeric_limits<double>::quiet_NaN());
    if (attr.nominal) col.tokens.resize(t.n_data_rows);
    col.missing.assign(t.n_data_rows, 0);
    t.columns.push_back(std::move(col));
  }
  for (size_t r = 0; r < data.size(); ++r) {
    for (size_t c = 0; c < attrs.size(); ++c) {
      const std::string cell = trim(data[r][c]);
      Column& col = t.columns[c];
      if (cell == "?" || missing.matches(cell)) {
        col.missing[r] = 1;
        continue;
      }
      if (attrs[c].nominal) {
        const std::string tok = strip_quotes(cell);
        if (!attrs[c].domain.count(tok)) {
          throw DataError("value '" + tok + "' outside nominal domain of " +
                          attrs[c].name);
        }
        col.tokens[r] = tok;
      } else {
        if (!parse_double(cell, col.values[r])) {
          throw DataError("non-numeric value '" + cell +
                          "' in numeric attribute " + attrs[c].name);
        }
      }
    }
  }
  assign_label_by_name(t);
  return t;
}

}  // namespace

Table load_table(std::istream& in, TableFormat format,
                 const MissingTokenSet& missing) {
  return format == TableFormat::csv ? load_csv(in, missing)
                                    : load_arff(in, missing);
}

TableFormat format_from_path(const std::string& path) {
  const size_t dot = path.find_last_of('.');
  const std::string ext =
      dot == std::string::npos ? std::string() : to_lower(path.substr(dot + 1));
  return ext == "arff" ? TableFormat::arff : TableFormat::csv;
}

Table load_table_file(const std::string& path, const MissingTokenSet& missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);
  return load_table(in, format_from_path(path), missing);
}

namespace {

void write_csv_field(std::string_view s, std::ostream& out) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

void write_csv(const Table& t, std::ostream& out) {
  for (size_t c = 0; c < t.n_cols(); ++c) {
    if (c) out << ',';
    write_csv_field(t.columns[c].name, out);
  }
  out << '\n';
  for (size_t r = 0; r < t.n_rows(); ++r) {
    for (size_t c = 0; c < t.n_cols(); ++c) {
      if (c) out << ',';
      const Column& col = t.columns[c];
      if (col.missing[r]) continue;
      if (col.kind == FeatureKind::numeric) {
        out << format_double(col.values[r]);
      } else {
        write_csv_field(col.tokens[r], out);
      }
    }
    out << '\n';
  }
}

void write_csv_file(const Table& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  write_csv(t, out);
}

}  // namespace granimpute
