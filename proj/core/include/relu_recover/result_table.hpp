#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relu_recover/config.hpp"

namespace relu_recover {

/// CSV output of one experiment: `#` provenance preamble (artifact version,
/// config echo, notes), header row, data rows. Cells are stored preformatted;
/// an empty cell means "no value".
struct ResultTable {
  std::vector<std::string> schema;
  std::vector<std::vector<std::string>> rows;
  ExperimentConfig config;
  std::vector<std::string> notes;
  bool diverged = false;

  std::size_t column(const std::string& name) const;
  /// Numeric value of a cell; NaN for an empty cell.
  double number(std::size_t row, const std::string& name) const;

  void write_csv(std::ostream& out) const;
  void save(const std::string& path) const;
};

/// Provenance lines (without the leading "# ") shared by every output file.
std::vector<std::string> provenance_lines(const ExperimentConfig& config,
                                          const std::vector<std::string>& notes = {});

/// Parses a table written by write_csv (schema, rows, config echo and notes).
ResultTable read_result_table(std::istream& in);

std::string artifact_version();

}  // namespace relu_recover
