#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>

#include "relest/scenario.hpp"

namespace relest {

enum class ReportFormat { kText, kJson, kCsv };

ReportFormat parse_report_format(const std::string& name);

/// Aligned three-column table: Method, Average Error (%), Standard deviation (1 decimal).
std::string render_text(const BenchTable& table);

/// Full precision. JSON uses shortest round-trip digits, CSV uses %.17g.
nlohmann::ordered_json table_to_json(const BenchTable& table);
std::string render_json(const BenchTable& table);
std::string render_csv(const BenchTable& table);
std::string render_report(const BenchTable& table, ReportFormat format);

BenchTable table_from_json(const nlohmann::ordered_json& j);
BenchTable parse_table_csv(std::string_view text);

/// Writes the rendered table. Throws IoError naming the path.
void emit_report(const BenchTable& table, ReportFormat format, const std::filesystem::path& path);

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::ordered_json& j);

/// Re-aggregates the per-replication outcomes stored in a manifest.
BenchTable recompute_table(const RunManifest& manifest);

/// Writes `content` to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace relest
