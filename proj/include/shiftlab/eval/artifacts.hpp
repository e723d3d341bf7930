// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace shiftlab::eval {

using CsvRow = std::vector<std::string>;

/// RFC 4180: fields holding a comma, quote, CR or LF are quoted, quotes doubled,
/// records end in CRLF.
std::string csv_field(const std::string& field);
std::string to_csv(const CsvRow& header, const std::vector<CsvRow>& rows);
void write_csv(const std::filesystem::path& path, const CsvRow& header, const std::vector<CsvRow>& rows);

/// Shortest round-trip decimal form.
std::string format_number(double v);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string group;
};

struct Bar {
  std::string label;
  double value = 0.0;
  double error = 0.0;  // half-height of the error whisker, 0 for none
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(const std::string& s);

std::string svg_scatter(const std::string& title, const std::vector<ScatterPoint>& points);
std::string svg_bars(const std::string& title, const std::vector<Bar>& bars);
std::string svg_lines(const std::string& title, const std::string& x_label, const std::vector<Series>& series);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace shiftlab::eval
