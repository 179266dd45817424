#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relu_recover/teacher.hpp"

namespace relu_recover {

/// Writes
///   # relu-recover dataset v1, N=<n>, d=<d>, seed=<s>, nu=<v>
/// then any extra `#` preamble lines, then one row per sample: d inputs and
/// the label, comma separated, 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<std::string>& preamble = {});

/// Reads the format above. The noise record is not stored on disk, so the
/// result has `noise == std::nullopt`. Throws IoError on malformed input.
Dataset read_dataset_csv(std::istream& in);

void save_dataset(const std::string& path, const Dataset& data,
                  const std::vector<std::string>& preamble = {});
Dataset load_dataset(const std::string& path);

/// Shortest round-trippable decimal for CSV cells ("%.17g").
std::string format_real(double v);

}  // namespace relu_recover
