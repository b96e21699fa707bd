// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace latsearch {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Comments may not contain "--".
std::string comment_text(std::string s) {
  for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- ");
  return s;
}

void header(std::ostringstream& o, const ChartLabels& labels) {
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!labels.comment.empty()) o << "<!-- " << comment_text(labels.comment) << " -->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(labels.title)
    << "</text>\n";
  o << "<text x=\"" << kLeft + (kWidth - kLeft - kRight) / 2 << "\" y=\"" << kHeight - 10
    << "\" text-anchor=\"middle\">" << esc(labels.x) << "</text>\n";
  o << "<text transform=\"translate(16," << kTop + (kHeight - kTop - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << esc(labels.y) << "</text>\n";
}

void legend(std::ostringstream& o, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 18 * static_cast<double>(i);
    o << "<rect x=\"" << kWidth - kRight + 15 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
      << kPalette[i % std::size(kPalette)] << "\"/>\n";
    o << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << y + 1 << "\">" << esc(names[i]) << "</text>\n";
  }
}

struct Range {
  double lo, hi;
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

void axes(std::ostringstream& o, const Range& xr, const Range& yr, bool x_ticks) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  o << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double y = yr.map(v, y0, y1);
    o << "<line x1=\"" << x0 - 4 << "\" y1=\"" << coord(y) << "\" x2=\"" << x0 << "\" y2=\"" << coord(y)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << x0 - 7 << "\" y=\"" << coord(y + 4) << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
    if (!x_ticks) continue;
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double x = xr.map(xv, x0, x1);
    o << "<line x1=\"" << coord(x) << "\" y1=\"" << y0 << "\" x2=\"" << coord(x) << "\" y2=\"" << y0 + 4
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << coord(x) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
  }
}

}  // namespace

std::string line_chart_svg(const std::vector<ChartSeries>& series, const ChartLabels& labels) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("line chart: non-finite point");
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  const Range xr = padded(xlo, xhi), yr = padded(ylo, yhi);
  std::ostringstream o;
  header(o, labels);
  axes(o, xr, yr, true);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    names.push_back(series[i].name);
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[i].points) o << coord(xr.map(x, x0, x1)) << ',' << coord(yr.map(y, y0, y1)) << ' ';
    o << "\"/>\n";
    for (auto [x, y] : series[i].points) {
      o << "<circle cx=\"" << coord(xr.map(x, x0, x1)) << "\" cy=\"" << coord(yr.map(y, y0, y1))
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
  }
  legend(o, names);
  o << "</svg>\n";
  return o.str();
}

std::string stacked_bar_svg(const std::vector<std::string>& categories, const std::vector<std::string>& series,
                            const std::vector<std::vector<double>>& values, const ChartLabels& labels) {
  if (values.size() != series.size()) throw std::invalid_argument("bar chart: one value row per series");
  std::vector<double> totals(categories.size(), 0.0);
  for (const auto& row : values) {
    if (row.size() != categories.size()) throw std::invalid_argument("bar chart: one value per category");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!(row[c] >= 0.0) || !std::isfinite(row[c])) throw std::invalid_argument("bar chart: values must be >= 0");
      totals[c] += row[c];
    }
  }
  const double top = totals.empty() ? 1.0 : std::max(*std::max_element(totals.begin(), totals.end()), 1e-300);
  const Range yr{0.0, top};
  std::ostringstream o;
  header(o, labels);
  axes(o, {0.0, 1.0}, yr, false);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double slot = (x1 - x0) / std::max<std::size_t>(1, categories.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    double base = 0.0;
    const double x = x0 + slot * (static_cast<double>(c) + 0.15);
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double ya = yr.map(base, y0, y1), yb = yr.map(base + values[s][c], y0, y1);
      o << "<rect x=\"" << coord(x) << "\" y=\"" << coord(yb) << "\" width=\"" << coord(slot * 0.7)
        << "\" height=\"" << coord(ya - yb) << "\" fill=\"" << kPalette[s % std::size(kPalette)] << "\"/>\n";
      base += values[s][c];
    }
    if (categories.size() <= 24) {
      o << "<text x=\"" << coord(x + slot * 0.35) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << esc(categories[c]) << "</text>\n";
    }
  }
  legend(o, series);
  o << "</svg>\n";
  return o.str();
}

}  // namespace latsearch
