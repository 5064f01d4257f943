#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mhb/harness.hpp"

namespace mhb {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_field(const std::string& text, const char* what) {
  if (text.find_first_of(",\n\r") != std::string::npos)
    throw std::invalid_argument(std::string(what) + " may not contain commas or line breaks: " + text);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::vector<std::vector<std::string>> read_table(const std::string& path, const char* header, std::size_t columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != header) throw std::runtime_error(path + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != columns)
      throw std::runtime_error(path + ": expected " + std::to_string(columns) + " fields in '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s) { return std::stod(s); }

}  // namespace

std::string format_params(const Params& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    if (key.find_first_of("=;,") != std::string::npos || value.find_first_of("=;,") != std::string::npos)
      throw std::invalid_argument("parameter '" + key + "=" + value + "' contains a reserved character");
    if (!out.empty()) out += ';';
    out += key + '=' + value;
  }
  return out;
}

Params parse_params(const std::string& text) {
  Params params;
  if (text.empty()) return params;
  for (const auto& item : split(text, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed parameter '" + item + "'");
    params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return params;
}

CsvFiles write_csv(const std::string& dir, const std::string& name, std::span<const SeriesRecord> records) {
  const std::filesystem::path base(dir);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  if (ec) throw std::runtime_error("cannot create " + base.string() + ": " + ec.message());

  CsvFiles files{(base / (name + "_raw.csv")).string(), (base / (name + "_summary.csv")).string(), std::nullopt};

  std::ofstream raw = open_out(files.raw);
  raw << kRawHeader << '\n';
  std::ofstream summary = open_out(files.summary);
  summary << kSummaryHeader << '\n';
  bool any_breakdown = false;
  for (const auto& rec : records) {
    const auto& s = rec.series;
    check_field(s.label, "benchmark label");
    const std::string params = format_params(s.params);
    any_breakdown = any_breakdown || !s.breakdown.empty();
    for (std::size_t i = 0; i < s.samples.size(); ++i)
      raw << s.label << ',' << params << ',' << i << ',' << num(s.samples[i]) << '\n';
    const auto& st = rec.stats;
    summary << s.label << ',' << params << ',' << st.n_raw << ',' << st.n_kept << ',' << num(st.mean) << ','
            << num(st.std) << ',' << num(st.median) << ',' << num(st.q1) << ',' << num(st.q3) << ','
            << num(st.min) << ',' << num(st.max) << ',' << (st.hmean_Bps ? num(*st.hmean_Bps) : std::string())
            << '\n';
  }
  finish(raw, files.raw);
  finish(summary, files.summary);

  if (any_breakdown) {
    files.breakdown = (base / (name + "_breakdown.csv")).string();
    std::ofstream out = open_out(*files.breakdown);
    out << kBreakdownHeader << '\n';
    for (const auto& rec : records) {
      const std::string params = format_params(rec.series.params);
      for (const auto& [op, ns] : rec.series.breakdown) {
        check_field(op, "operation name");
        out << rec.series.label << ',' << params << ',' << op << ',' << num(ns) << '\n';
      }
    }
    finish(out, *files.breakdown);
  }
  return files;
}

std::vector<RawRow> read_raw_csv(const std::string& path) {
  std::vector<RawRow> rows;
  for (auto& f : read_table(path, kRawHeader, 4))
    rows.push_back({f[0], f[1], static_cast<std::size_t>(std::stoull(f[2])), to_double(f[3])});
  return rows;
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::vector<SummaryRow> rows;
  for (auto& f : read_table(path, kSummaryHeader, 12)) {
    SummaryRow row{f[0], f[1], {}};
    auto& s = row.stats;
    s.n_raw = std::stoull(f[2]);
    s.n_kept = std::stoull(f[3]);
    s.mean = to_double(f[4]);
    s.std = to_double(f[5]);
    s.median = to_double(f[6]);
    s.q1 = to_double(f[7]);
    s.q3 = to_double(f[8]);
    s.min = to_double(f[9]);
    s.max = to_double(f[10]);
    if (!f[11].empty()) s.hmean_Bps = to_double(f[11]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BreakdownRow> read_breakdown_csv(const std::string& path) {
  std::vector<BreakdownRow> rows;
  for (auto& f : read_table(path, kBreakdownHeader, 4)) rows.push_back({f[0], f[1], f[2], to_double(f[3])});
  return rows;
}

}  // namespace mhb
