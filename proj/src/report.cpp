#include "relest/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "relest/csv.hpp"
#include "relest/error.hpp"

namespace relest {

namespace {

using json = nlohmann::ordered_json;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("non-numeric value '" + s + "'", line);
  }
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError("non-integer count '" + s + "'", line);
  }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw InputError("unknown format '" + name + "' (expected text, json or csv)");
}

std::string render_text(const BenchTable& table) {
  const std::string h_method = "Method";
  const std::string h_avg = "Average Error (%)";
  const std::string h_sd = "Standard deviation";
  std::size_t w_method = h_method.size();
  for (const auto& r : table.rows) w_method = std::max(w_method, std::string(to_string(r.method)).size());

  std::ostringstream out;
  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };
  auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
  out << pad_right(h_method, w_method) << "  " << h_avg << "  " << h_sd << '\n';
  for (const auto& r : table.rows) {
    out << pad_right(to_string(r.method), w_method) << "  " << pad_left(fixed(r.avg_error_pct, 1), h_avg.size()) << "  "
        << pad_left(fixed(r.std_dev, 1), h_sd.size()) << '\n';
  }
  for (const auto& r : table.rows) {
    if (r.failures > 0) {
      out << "note: " << to_string(r.method) << " excludes " << r.failures << " failed replication"
          << (r.failures == 1 ? "" : "s") << '\n';
    }
  }
  return out.str();
}

json table_to_json(const BenchTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row;
    row["method"] = to_string(r.method);
    row["avg_error_pct"] = r.avg_error_pct;
    row["std_dev"] = r.std_dev;
    row["replications"] = r.replications;
    row["failures"] = r.failures;
    rows.push_back(std::move(row));
  }
  json j;
  j["rows"] = std::move(rows);
  return j;
}

std::string render_json(const BenchTable& table) { return table_to_json(table).dump(2) + "\n"; }

std::string render_csv(const BenchTable& table) {
  std::ostringstream out;
  out << "method,avg_error_pct,std_dev,replications,failures\n";
  for (const auto& r : table.rows) {
    out << to_string(r.method) << ',' << full(r.avg_error_pct) << ',' << full(r.std_dev) << ',' << r.replications << ','
        << r.failures << '\n';
  }
  return out.str();
}

std::string render_report(const BenchTable& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText:
      return render_text(table);
    case ReportFormat::kJson:
      return render_json(table);
    case ReportFormat::kCsv:
      return render_csv(table);
  }
  return {};
}

BenchTable table_from_json(const json& j) {
  try {
    BenchTable table;
    for (const auto& row : j.at("rows")) {
      BenchRow r;
      r.method = parse_bench_method(row.at("method").get<std::string>());
      r.avg_error_pct = row.at("avg_error_pct").get<double>();
      r.std_dev = row.at("std_dev").get<double>();
      r.replications = row.at("replications").get<std::size_t>();
      r.failures = row.value("failures", std::size_t{0});
      table.rows.push_back(r);
    }
    return table;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
}

BenchTable parse_table_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  const CsvTable csv = parse_csv(in);
  const std::vector<std::string> expected = {"method", "avg_error_pct", "std_dev", "replications", "failures"};
  if (csv.header != expected) throw ParseError("unexpected report header", 1);
  BenchTable table;
  for (std::size_t i = 0; i < csv.records.size(); ++i) {
    const auto& rec = csv.records[i];
    const std::size_t line = csv.record_lines[i];
    BenchRow r;
    r.method = parse_bench_method(rec[0]);
    r.avg_error_pct = parse_double(rec[1], line);
    r.std_dev = parse_double(rec[2], line);
    r.replications = parse_count(rec[3], line);
    r.failures = parse_count(rec[4], line);
    table.rows.push_back(r);
  }
  return table;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

void emit_report(const BenchTable& table, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render_report(table, format));
}

json manifest_to_json(const RunManifest& m) {
  json j;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["config"] = m.config;
  json outcomes = json::array();
  for (const auto& o : m.outcomes) {
    json row;
    row["d"] = o.d;
    row["replication"] = o.replication;
    row["method"] = to_string(o.method);
    row["truth"] = o.truth;
    row["estimate"] = o.estimate ? json(*o.estimate) : json(nullptr);
    row["error_pct"] = o.error_pct ? json(*o.error_pct) : json(nullptr);
    row["converged"] = o.converged;
    if (!o.failure.empty()) row["failure"] = o.failure;
    outcomes.push_back(std::move(row));
  }
  j["outcomes"] = std::move(outcomes);
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.threads = j.value("threads", 1);
    m.started = j.value("started", std::string{});
    m.finished = j.value("finished", std::string{});
    m.config = j.at("config");
    for (const auto& row : j.at("outcomes")) {
      ReplicationOutcome o;
      o.d = row.at("d").get<Eigen::Index>();
      o.replication = row.at("replication").get<std::size_t>();
      o.method = parse_bench_method(row.at("method").get<std::string>());
      o.truth = row.at("truth").get<double>();
      if (!row.at("estimate").is_null()) o.estimate = row.at("estimate").get<double>();
      if (!row.at("error_pct").is_null()) o.error_pct = row.at("error_pct").get<double>();
      o.converged = row.value("converged", true);
      o.failure = row.value("failure", std::string{});
      m.outcomes.push_back(std::move(o));
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

BenchTable recompute_table(const RunManifest& manifest) {
  std::vector<BenchMethod> methods;
  if (manifest.config.contains("methods")) {
    for (const auto& m : manifest.config.at("methods")) methods.push_back(parse_bench_method(m.get<std::string>()));
  } else {
    for (const auto& o : manifest.outcomes) {
      if (std::find(methods.begin(), methods.end(), o.method) == methods.end()) methods.push_back(o.method);
    }
  }
  return aggregate(manifest.outcomes, methods);
}

}  // namespace relest
