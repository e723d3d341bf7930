// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/graph/jsonl.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "shiftlab/errors.hpp"

namespace shiftlab::graph {
namespace {

bool is_gzip(const std::filesystem::path& path) { return path.extension() == ".gz"; }

std::string json_escape(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_json_line(const Graph& g) {
  std::string out = "{\"n\":" + std::to_string(g.n) + ",\"edges\":[";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (i) out += ',';
    out += '[' + std::to_string(g.edges[i].first) + ',' + std::to_string(g.edges[i].second) + ']';
  }
  out += "],\"x\":[";
  const std::size_t d = g.feature_dim();
  for (std::size_t r = 0; r < g.n; ++r) {
    if (r) out += ',';
    out += '[';
    for (std::size_t c = 0; c < d; ++c) {
      if (c) out += ',';
      out += format_double(g.x.at(r, c));
    }
    out += ']';
  }
  out += "],\"y\":" + std::to_string(g.y) + ",\"env\":" + json_escape(g.env) + "}";
  return out;
}

Graph parse_json_line(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("edge must be a [u,v] pair", line_no);
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    const auto& xs = j.at("x");
    if (!xs.is_array() || xs.size() != n) throw ParseError("\"x\" must have one row per node", line_no);
    const std::size_t d = n ? xs[0].size() : 0;
    std::vector<double> data;
    data.reserve(n * d);
    for (const auto& row : xs) {
      if (!row.is_array() || row.size() != d) throw ParseError("ragged feature matrix", line_no);
      for (const auto& v : row) data.push_back(v.get<double>());
    }
    Graph g{n, std::move(edges), ad::Tensor({n, d}, std::move(data)), j.at("y").get<std::size_t>(),
            j.at("env").get<std::string>()};
    g.validate();
    return g;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(e.what(), line_no);
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const Graph> graphs) {
  if (is_gzip(path)) {
    std::unique_ptr<gzFile_s, int (*)(gzFile)> f(gzopen(path.c_str(), "wb9"), gzclose);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const Graph& g : graphs) {
      const std::string line = to_json_line(g) + '\n';
      if (gzwrite(f.get(), line.data(), static_cast<unsigned>(line.size())) != static_cast<int>(line.size())) {
        throw std::runtime_error("write failed on " + path.string());
      }
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const Graph& g : graphs) out << to_json_line(g) << '\n';
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

std::vector<Graph> read_jsonl(const std::filesystem::path& path) {
  std::string text;
  if (is_gzip(path)) {
    std::unique_ptr<gzFile_s, int (*)(gzFile)> f(gzopen(path.c_str(), "rb"), gzclose);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    char buf[1 << 16];
    int got;
    while ((got = gzread(f.get(), buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(got));
    if (got < 0) throw std::runtime_error("corrupt gzip stream in " + path.string());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = std::move(ss).str();
  }

  std::vector<Graph> graphs;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) graphs.push_back(parse_json_line(line, line_no));
    pos = end + 1;
  }
  return graphs;
}

}  // namespace shiftlab::graph
