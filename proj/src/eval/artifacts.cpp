// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/eval/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "shiftlab/errors.hpp"

namespace shiftlab::eval {
namespace {

constexpr double kWidth = 640.0, kHeight = 420.0, kMargin = 56.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
  double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

std::string header(const std::string& title) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(title) << "</text>\n"
    << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
    << kHeight - kMargin << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
    << "\" stroke=\"black\"/>\n";
  return s.str();
}

std::string legend(const std::vector<std::string>& names) {
  std::ostringstream s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMargin + 16.0 * static_cast<double>(i);
    s << "<rect x=\"" << kWidth - kMargin - 120 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
      << kPalette[i % std::size(kPalette)] << "\"/>\n"
      << "<text x=\"" << kWidth - kMargin - 104 << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << xml_escape(names[i]) << "</text>\n";
  }
  return s.str();
}

std::string axis_labels(const Range& y) {
  std::ostringstream s;
  s << "<text x=\"" << kMargin - 6 << "\" y=\"" << kHeight - kMargin
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(y.lo) << "</text>\n"
    << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(y.hi) << "</text>\n";
  return s.str();
}

}  // namespace

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const CsvRow& header_row, const std::vector<CsvRow>& rows) {
  std::string out;
  auto emit = [&](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += "\r\n";
  };
  emit(header_row);
  for (const auto& row : rows) {
    if (row.size() != header_row.size()) throw ContractError("csv row width differs from header");
    emit(row);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvRow& header_row, const std::vector<CsvRow>& rows) {
  write_text(path, to_csv(header_row, rows));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_scatter(const std::string& title, const std::vector<ScatterPoint>& points) {
  Range xr, yr;
  std::vector<std::string> groups;
  for (const auto& p : points) {
    xr.add(p.x);
    yr.add(p.y);
    if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
  }
  xr.settle();
  yr.settle();
  std::ostringstream s;
  s << header(title);
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    const auto g = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), p.group) - groups.begin());
    s << "<circle cx=\"" << format_number(xr.map(p.x, kMargin, kWidth - kMargin)) << "\" cy=\""
      << format_number(yr.map(p.y, kHeight - kMargin, kMargin)) << "\" r=\"2.5\" fill=\""
      << kPalette[g % std::size(kPalette)] << "\" fill-opacity=\"0.7\"/>\n";
  }
  s << legend(groups) << "</svg>\n";
  return s.str();
}

std::string svg_bars(const std::string& title, const std::vector<Bar>& bars) {
  Range yr;
  yr.add(0.0);
  for (const auto& b : bars) {
    yr.add(b.value + b.error);
    yr.add(b.value - b.error);
  }
  yr.settle();
  std::ostringstream s;
  s << header(title) << axis_labels(yr);
  const double slot = (kWidth - 2 * kMargin) / static_cast<double>(std::max<std::size_t>(1, bars.size()));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double x = kMargin + slot * static_cast<double>(i) + slot * 0.15;
    const double w = slot * 0.7;
    const double v = std::isfinite(b.value) ? b.value : yr.hi;
    const double y0 = yr.map(0.0, kHeight - kMargin, kMargin), y1 = yr.map(v, kHeight - kMargin, kMargin);
    s << "<rect x=\"" << format_number(x) << "\" y=\"" << format_number(std::min(y0, y1)) << "\" width=\""
      << format_number(w) << "\" height=\"" << format_number(std::abs(y1 - y0)) << "\" fill=\""
      << kPalette[i % std::size(kPalette)] << "\"/>\n";
    if (b.error > 0.0) {
      const double cx = x + w / 2;
      s << "<line x1=\"" << format_number(cx) << "\" y1=\"" << format_number(yr.map(v - b.error, kHeight - kMargin, kMargin))
        << "\" x2=\"" << format_number(cx) << "\" y2=\"" << format_number(yr.map(v + b.error, kHeight - kMargin, kMargin))
        << "\" stroke=\"black\"/>\n";
    }
    s << "<text x=\"" << format_number(x + w / 2) << "\" y=\"" << kHeight - kMargin + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(b.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_lines(const std::string& title, const std::string& x_label, const std::vector<Series>& series) {
  Range xr, yr;
  std::vector<std::string> names;
  for (const auto& se : series) {
    if (se.x.size() != se.y.size()) throw std::invalid_argument("series '" + se.name + "' has mismatched x and y");
    for (double v : se.x) xr.add(v);
    for (double v : se.y) yr.add(v);
    names.push_back(se.name);
  }
  xr.settle();
  yr.settle();
  std::ostringstream s;
  s << header(title) << axis_labels(yr) << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(x_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::string pts;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (!std::isfinite(series[k].x[i]) || !std::isfinite(series[k].y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += format_number(xr.map(series[k].x[i], kMargin, kWidth - kMargin)) + "," +
             format_number(yr.map(series[k].y[i], kHeight - kMargin, kMargin));
    }
    s << "<polyline fill=\"none\" stroke=\"" << kPalette[k % std::size(kPalette)] << "\" stroke-width=\"2\" points=\""
      << pts << "\"/>\n";
  }
  s << legend(names) << "</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace shiftlab::eval
