#pragma once

#include <string>

#include "relu_recover/result_table.hpp"

namespace relu_recover {

enum class PlotKind { line, scatter };

/// Self-contained SVG rendering of a result table; the provenance preamble is
/// embedded as an XML comment. Series are chosen from the schema:
///  - iter,... : one series per remaining column against iter
///  - d,N,ratio,success_count,trials : success fraction vs N/d, one series per d
///  - d,N,ratio,avg_error : log10 average error vs log10 N/d, one series per d
///  - check,... : value vs probe_id, one series per check
/// Throws std::invalid_argument on an empty table or unknown schema.
std::string emit_plot(const ResultTable& table, PlotKind kind);

}  // namespace relu_recover
