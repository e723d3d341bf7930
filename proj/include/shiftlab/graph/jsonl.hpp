// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftlab/graph/graph.hpp"

namespace shiftlab::graph {

/// One graph per line:
///   {"n":3,"edges":[[0,1],[1,2]],"x":[[...],...],"y":0,"env":"path"}
/// Floats are written with 17 significant digits so reading back is exact.
std::string to_json_line(const Graph& g);
Graph parse_json_line(std::string_view line, std::size_t line_no);

/// Paths ending in ".gz" are gzip-compressed.
void write_jsonl(const std::filesystem::path& path, std::span<const Graph> graphs);
std::vector<Graph> read_jsonl(const std::filesystem::path& path);

/// Shortest exact text for a double ("%.17g").
std::string format_double(double v);

}  // namespace shiftlab::graph
