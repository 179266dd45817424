#include "relu_recover/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace relu_recover {

namespace {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct Figure {
  std::string title, x_label, y_label;
  std::vector<Series> series;
};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
  for (std::size_t pos; (pos = s.find("--")) != std::string::npos;) s.replace(pos, 2, "- -");
  if (!s.empty() && s.back() == '-') s += ' ';
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool has(const ResultTable& t, const std::string& col) {
  return std::find(t.schema.begin(), t.schema.end(), col) != t.schema.end();
}

Figure grouped(const ResultTable& t, const std::string& group_col, const std::string& x_col,
               const std::function<double(std::size_t)>& y_of, bool log_x) {
  Figure fig;
  std::map<std::string, Series> by_group;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string key = t.rows[r][t.column(group_col)];
    if (!by_group.count(key)) {
      order.push_back(key);
      by_group[key].name = group_col + "=" + key;
    }
    const double x = t.number(r, x_col);
    const double y = y_of(r);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    by_group[key].x.push_back(log_x ? std::log10(x) : x);
    by_group[key].y.push_back(y);
  }
  for (const auto& k : order) fig.series.push_back(by_group[k]);
  return fig;
}

Figure figure_for(const ResultTable& t) {
  if (t.schema.empty() || t.rows.empty()) throw std::invalid_argument("emit_plot: empty table");
  if (t.schema.front() == "iter") {
    Figure fig;
    fig.title = to_string(t.config.experiment);
    fig.x_label = "iteration";
    fig.y_label = t.schema.size() > 1 && t.schema[1].rfind("log10", 0) == 0 ? "log10 loss" : "value";
    for (std::size_t c = 1; c < t.schema.size(); ++c) {
      Series s;
      s.name = t.schema[c];
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double y = t.number(r, t.schema[c]);
        if (!std::isfinite(y)) continue;
        s.x.push_back(t.number(r, "iter"));
        s.y.push_back(y);
      }
      fig.series.push_back(std::move(s));
    }
    return fig;
  }
  if (has(t, "success_count") && has(t, "ratio") && has(t, "d")) {
    Figure fig = grouped(t, "d", "ratio", [&](std::size_t r) {
      return t.number(r, "success_count") / t.number(r, "trials");
    }, false);
    fig.title = "success probability";
    fig.x_label = "N/d";
    fig.y_label = "success fraction";
    return fig;
  }
  if (has(t, "avg_error") && has(t, "ratio") && has(t, "d")) {
    Figure fig = grouped(t, "d", "ratio", [&](std::size_t r) {
      return std::log10(t.number(r, "avg_error"));
    }, true);
    fig.title = "average estimation error";
    fig.x_label = "log10 N/d";
    fig.y_label = "log10 avg error";
    return fig;
  }
  if (t.schema.front() == "check" && has(t, "value")) {
    Figure fig = grouped(t, "check", "probe_id", [&](std::size_t r) { return t.number(r, "value"); },
                         false);
    fig.title = "theory checks";
    fig.x_label = "probe";
    fig.y_label = "value";
    return fig;
  }
  throw std::invalid_argument("emit_plot: unsupported table schema");
}

}  // namespace

std::string emit_plot(const ResultTable& table, PlotKind kind) {
  const Figure fig = figure_for(table);

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : fig.series) {
    for (double v : s.x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
    for (double v : s.y) y_lo = std::min(y_lo, v), y_hi = std::max(y_hi, v);
  }
  if (!std::isfinite(x_lo)) throw std::invalid_argument("emit_plot: no finite points");
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  constexpr double width = 720, height = 440, left = 70, right = 170, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<!--\n";
  for (const auto& line : provenance_lines(table.config, table.notes)) {
    svg << comment_safe(line) << '\n';
  }
  svg << "-->\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(fig.title) << "</text>\n";
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\"/>\n</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / ticks;
    const double yv = y_lo + (y_hi - y_lo) * i / ticks;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(xv)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << escape_xml(fig.x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + plot_h / 2 << ")\">" << escape_xml(fig.y_label) << "</text>\n";
  svg << "</g>\n";

  for (std::size_t i = 0; i < fig.series.size(); ++i) {
    const auto& s = fig.series[i];
    const char* color = palette[i % (sizeof palette / sizeof *palette)];
    if (kind == PlotKind::line && s.x.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t p = 0; p < s.x.size(); ++p) {
        svg << (p ? " " : "") << num(px(s.x[p])) << ',' << num(py(s.y[p]));
      }
      svg << "\"/>\n";
    } else {
      svg << "<g fill=\"" << color << "\">\n";
      for (std::size_t p = 0; p < s.x.size(); ++p) {
        svg << "<circle cx=\"" << num(px(s.x[p])) << "\" cy=\"" << num(py(s.y[p]))
            << "\" r=\"2.5\"/>\n";
      }
      svg << "</g>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << left + plot_w + 32 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + plot_w + 38 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace relu_recover
