#include "relu_recover/result_table.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "relu_recover/errors.hpp"

#ifndef RELU_RECOVER_VERSION
#define RELU_RECOVER_VERSION "0.0.0"
#endif

namespace relu_recover {

namespace {

constexpr const char* kNotePrefix = "note: ";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string artifact_version() { return RELU_RECOVER_VERSION; }

std::vector<std::string> provenance_lines(const ExperimentConfig& config,
                                          const std::vector<std::string>& notes) {
  std::vector<std::string> lines;
  lines.push_back("relu-recover " + artifact_version() + " " + to_string(config.experiment));
  lines.emplace_back(kConfigBegin);
  for (auto& l : config.to_lines()) lines.push_back(l);
  lines.emplace_back(kConfigEnd);
  for (const auto& n : notes) lines.push_back(kNotePrefix + n);
  return lines;
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i] == name) return i;
  }
  throw std::out_of_range("ResultTable: no column '" + name + "'");
}

double ResultTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(cell.c_str(), nullptr);
}

void ResultTable::write_csv(std::ostream& out) const {
  for (const auto& line : provenance_lines(config, notes)) out << "# " << line << '\n';
  for (std::size_t i = 0; i < schema.size(); ++i) out << (i ? "," : "") << schema[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != schema.size()) {
      throw std::logic_error("ResultTable: row width does not match schema");
    }
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void ResultTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

ResultTable read_result_table(std::istream& in) {
  std::stringstream preamble;
  ResultTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      preamble << line << '\n';
      const std::string body = line.size() > 2 ? line.substr(2) : "";
      if (body.rfind(kNotePrefix, 0) == 0) table.notes.push_back(body.substr(6));
      continue;
    }
    table.schema = split_csv_line(line);
    break;
  }
  if (table.schema.empty()) throw IoError("result table has no header row");
  table.config = parse_config_echo(preamble);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.schema.size()) throw IoError("result row width mismatch: " + line);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace relu_recover
