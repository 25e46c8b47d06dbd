#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "smdma/core/error.hpp"

namespace smdma::cli {

/// Header-indexed CSV table. Comment lines start with '#'; fields are plain
/// comma-separated tokens (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::usage, "CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      fail(ErrorKind::data, "CSV line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(fields));
  }
  if (t.rows.empty()) fail(ErrorKind::data, "CSV has no data rows");
  return t;
}

inline double parse_value(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') fail(ErrorKind::data, "CSV value '" + s + "' is not a number");
  return v;
}

struct PlotSpec {
  std::string x = "snr_db";
  std::string y = "psnr_db";
  std::string group = "sorting";
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, median y); y may be +inf
};

/// Median of y per (group, x), groups in first-appearance order, x ascending.
inline std::vector<Series> build_series(const CsvTable& t, const PlotSpec& spec) {
  const auto cx = t.column(spec.x), cy = t.column(spec.y), cg = t.column(spec.group);
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<double>>> buckets;
  for (const auto& r : t.rows) {
    if (!buckets.contains(r[cg])) order.push_back(r[cg]);
    buckets[r[cg]][parse_value(r[cx])].push_back(parse_value(r[cy]));
  }
  std::vector<Series> out;
  for (const auto& name : order) {
    Series s{name, {}};
    for (auto& [x, ys] : buckets[name]) {
      std::sort(ys.begin(), ys.end());
      const std::size_t n = ys.size();
      const double med = n % 2 ? ys[n / 2] : (std::isinf(ys[n / 2]) ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]));
      s.points.emplace_back(x, med);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Static SVG line chart. Infinite y values sit on the top edge, drawn as hollow
/// squares instead of dots.
inline std::string render_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      if (std::isfinite(y)) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (std::isfinite(y) ? (y1 - y) / (y1 - y0) * ph : 0.0); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  o << "<g class=\"axes\" stroke=\"black\">\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  o << "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  o << "<text class=\"xlabel\" x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(spec.x) << "</text>\n";
  o << "<text class=\"ylabel\" x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
    << ")\">" << xml_escape(spec.y) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* c = colors[i % 8];
    o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) o << (k ? " " : "") << px(s.points[k].first) << "," << py(s.points[k].second);
    o << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      if (std::isfinite(y))
        o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      else
        o << "<rect class=\"clipped\" x=\"" << px(x) - 4 << "\" y=\"" << py(y) - 4 << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"" << c
          << "\"/>\n";
    }
  }
  o << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly << "\" stroke=\""
      << colors[i % 8] << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(spec.group + "=" + series[i].name) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace smdma::cli
