#include "relu_recover/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "relu_recover/errors.hpp"

namespace relu_recover {

namespace {

constexpr const char* kHeaderPrefix = "# relu-recover dataset v1";

// Extracts the value following "<key>=" in a comma separated header.
std::string header_field(const std::string& header, const std::string& key) {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while ((pos = header.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || header[pos - 1] == ' ' || header[pos - 1] == ',') break;
    pos += needle.size();
  }
  if (pos == std::string::npos) throw IoError("dataset header missing field '" + key + "'");
  pos += needle.size();
  const std::size_t end = header.find(',', pos);
  return header.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

double parse_double(const std::string& text, std::size_t line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || (end && *end != '\0')) {
    throw IoError("dataset line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<std::string>& preamble) {
  out << kHeaderPrefix << ", N=" << data.n() << ", d=" << data.dim() << ", seed=" << data.seed
      << ", nu=" << format_real(data.nu) << '\n';
  for (const auto& line : preamble) out << "# " << line << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << format_real(data.inputs(i, j)) << ',';
    out << format_real(data.labels(i)) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind(kHeaderPrefix, 0) != 0) {
    throw IoError("not a relu-recover v1 dataset (bad header line)");
  }
  long long n = 0, d = 0;
  Dataset data;
  try {
    n = std::stoll(header_field(header, "N"));
    d = std::stoll(header_field(header, "d"));
    data.seed = std::stoull(header_field(header, "seed"));
    data.nu = std::stod(header_field(header, "nu"));
  } catch (const std::logic_error&) {
    throw IoError("dataset header has a malformed field: " + header);
  }
  if (n < 1 || d < 1) throw IoError("dataset header: N and d must be positive");

  data.inputs.resize(n, d);
  data.labels.resize(n);
  std::string line;
  std::size_t line_no = 1;
  long long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (row >= n) throw IoError("dataset has more rows than N=" + std::to_string(n));
    std::stringstream ss(line);
    std::string cell;
    long long col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col > d) throw IoError("dataset line " + std::to_string(line_no) + ": too many columns");
      const double v = parse_double(cell, line_no);
      if (col < d) data.inputs(row, col) = v;
      else data.labels(row) = v;
      ++col;
    }
    if (col != d + 1) {
      throw IoError("dataset line " + std::to_string(line_no) + ": expected " +
                    std::to_string(d + 1) + " columns, got " + std::to_string(col));
    }
    ++row;
  }
  if (row != n) {
    throw IoError("dataset has " + std::to_string(row) + " rows, header says N=" + std::to_string(n));
  }
  return data;
}

void save_dataset(const std::string& path, const Dataset& data,
                  const std::vector<std::string>& preamble) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_dataset_csv(out, data, preamble);
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_dataset_csv(in);
}

}  // namespace relu_recover
