#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <variant>
#include <vector>

#include "relest/anova.hpp"
#include "relest/classical.hpp"
#include "relest/core.hpp"

namespace relest {

/// Header plus string records, each tagged with the line it started on.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
};

/// RFC-4180-style reader: comma separated, optional double quotes with "" escapes,
/// quoted fields may span lines, CRLF accepted. The first record is the header.
/// Throws ParseError on an empty input, a ragged row or an unterminated quote.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

enum class CsvLayout { kItems, kGroups, kSamples };

using IngestResult = std::variant<ItemResponseMatrix, GroupedObservations, SampleSet>;

/// items: one column per item, one row per subject (binary detected automatically).
/// groups: a group-id column ("group", else the first) and a value column ("value", else the second).
/// samples: one column per variable; the mean is set to zero (known-mean convention).
IngestResult ingest_csv(const std::filesystem::path& path, CsvLayout layout);

ItemResponseMatrix ingest_items(const CsvTable& table);
GroupedObservations ingest_groups(const CsvTable& table);
SampleSet ingest_samples(const CsvTable& table);

/// Square numeric matrix with a header row (names ignored), used for basis files.
SymMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace relest
