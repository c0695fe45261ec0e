#include "relest/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "relest/error.hpp"

namespace relest {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& raw, std::size_t line, std::size_t column) {
  const std::string field = trim(raw);
  if (field.empty()) {
    throw ParseError("missing value in column " + std::to_string(column + 1) + " (missing cells are not supported)", line);
  }
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("non-numeric value '" + field + "' in column " + std::to_string(column + 1), line);
  }
  return value;
}

Matrix numeric_block(const CsvTable& table) {
  const auto rows = static_cast<Eigen::Index>(table.records.size());
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& rec = table.records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = parse_number(rec[static_cast<std::size_t>(j)], table.record_lines[static_cast<std::size_t>(i)],
                             static_cast<std::size_t>(j));
    }
  }
  return m;
}

void require_rows(const CsvTable& table) {
  if (table.records.empty()) throw ParseError("no data rows after the header", 1);
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any_char = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&]() {
    record.push_back(field);
    field.clear();
    field_was_quoted = false;
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                               std::to_string(record.size()),
                           record_line);
        }
        table.records.push_back(std::move(record));
        table.record_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  char ch = 0;
  while (in.get(ch)) {
    any_char = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || field_was_quoted) throw ParseError("stray quote inside an unquoted field", line);
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_was_quoted = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(ch);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", record_line);
  if (!field.empty() || !record.empty()) end_record();
  if (!any_char || table.header.empty()) throw ParseError("empty CSV input", 1);
  for (auto& name : table.header) name = trim(name);
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    return parse_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

ItemResponseMatrix ingest_items(const CsvTable& table) {
  require_rows(table);
  return ItemResponseMatrix(numeric_block(table));
}

SampleSet ingest_samples(const CsvTable& table) {
  require_rows(table);
  SampleSet s;
  s.rows = numeric_block(table);
  s.mu = Vector::Zero(s.rows.cols());
  s.names = table.header;
  return s;
}

GroupedObservations ingest_groups(const CsvTable& table) {
  require_rows(table);
  if (table.header.size() < 2) throw ParseError("groups layout needs a group column and a value column", 1);
  std::size_t group_col = 0;
  std::size_t value_col = 1;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (lower(table.header[j]) == "group") group_col = j;
  }
  bool value_named = false;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (lower(table.header[j]) == "value") {
      value_col = j;
      value_named = true;
    }
  }
  if (!value_named && value_col == group_col) value_col = 0;

  std::vector<std::string> labels;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> groups;
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    const auto& rec = table.records[i];
    const std::string id = trim(rec[group_col]);
    if (id.empty()) throw ParseError("missing group id", table.record_lines[i]);
    const double v = parse_number(rec[value_col], table.record_lines[i], value_col);
    auto [it, inserted] = index.try_emplace(id, groups.size());
    if (inserted) {
      labels.push_back(id);
      groups.emplace_back();
    }
    groups[it->second].push_back(v);
  }
  return GroupedObservations(std::move(groups), std::move(labels));
}

IngestResult ingest_csv(const std::filesystem::path& path, CsvLayout layout) {
  const CsvTable table = read_csv(path);
  switch (layout) {
    case CsvLayout::kItems:
      return ingest_items(table);
    case CsvLayout::kGroups:
      return ingest_groups(table);
    case CsvLayout::kSamples:
      return ingest_samples(table);
  }
  throw InputError("unknown CSV layout");
}

SymMatrix read_matrix_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require_rows(table);
  const Matrix m = numeric_block(table);
  if (m.rows() != m.cols()) {
    throw InputError(path.string() + ": basis matrix must be square, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  if (!m.isApprox(m.transpose(), 1e-12)) throw InputError(path.string() + ": basis matrix is not symmetric");
  return SymMatrix(m);
}

}  // namespace relest
