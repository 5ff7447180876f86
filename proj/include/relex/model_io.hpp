// Copyright 2026 The Relex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text persistence for embedding matrices.
//
// A model file is a sequence of blocks. Each block starts with the header
//
//   RELEX-EMBED v1 <kind> <rows> <dim>
//
// followed by <rows> lines `<symbol>\t<v1> <v2> ... <vdim>`. Values are
// written in shortest round-trip decimal form, so loading reproduces every
// double bit-exactly.

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "relex/core.hpp"
#include "relex/vocabulary.hpp"

namespace relex {

inline constexpr std::string_view kModelMagic = "RELEX-EMBED";
inline constexpr std::string_view kModelVersion = "v1";

// One persisted block: the id<->symbol mapping and its embeddings.
struct NamedMatrix {
  std::string kind;  // features, relationships or entities
  Vocabulary symbols;
  EmbeddingMatrix values;
};

inline bool valid_matrix_kind(std::string_view kind) {
  return kind == "features" || kind == "relationships" || kind == "entities";
}

inline void append_double(std::string &out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

inline void write_matrix(std::ostream &os, const NamedMatrix &m) {
  if (!valid_matrix_kind(m.kind)) throw std::invalid_argument("save_model: bad kind '" + m.kind + "'");
  if (m.symbols.size() != m.values.rows())
    throw DimensionMismatch("save_model: " + m.kind + " has " + std::to_string(m.symbols.size()) +
                            " symbols but " + std::to_string(m.values.rows()) + " rows");
  os << kModelMagic << ' ' << kModelVersion << ' ' << m.kind << ' ' << m.values.rows() << ' ' << m.values.dim()
     << '\n';
  std::string line;
  for (std::size_t i = 0; i < m.values.rows(); ++i) {
    const auto &sym = m.symbols.token_of(static_cast<std::uint32_t>(i));
    if (sym.find_first_of("\t\n") != std::string::npos)
      throw std::invalid_argument("save_model: symbol contains tab or newline");
    line.assign(sym);
    line.push_back('\t');
    auto r = m.values.row(i);
    for (std::size_t d = 0; d < r.size(); ++d) {
      if (d) line.push_back(' ');
      append_double(line, r[d]);
    }
    line.push_back('\n');
    os << line;
  }
}

inline void save_model(const std::string &path, std::span<const NamedMatrix> blocks) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  for (const auto &b : blocks) write_matrix(os, b);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline std::vector<NamedMatrix> load_model(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::vector<NamedMatrix> blocks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream hs(line);
    std::string magic, version, kind;
    long long rows = -1, dim = -1;
    hs >> magic >> version >> kind >> rows >> dim;
    if (magic != kModelMagic) throw ParseError(path, lineno, "expected " + std::string(kModelMagic) + " header");
    if (version != kModelVersion) throw VersionMismatch(path + ": unsupported model version '" + version + "'");
    if (!hs || !valid_matrix_kind(kind) || rows < 0 || dim < 1) throw ParseError(path, lineno, "malformed header");

    NamedMatrix m{kind, {}, EmbeddingMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(dim))};
    for (long long i = 0; i < rows; ++i) {
      if (!std::getline(is, line)) throw DimensionMismatch(path + ": expected " + std::to_string(rows) + " rows");
      ++lineno;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ParseError(path, lineno, "missing tab after symbol");
      const std::string symbol = line.substr(0, tab);
      if (m.symbols.contains(symbol)) throw ParseError(path, lineno, "duplicate symbol '" + symbol + "'");
      m.symbols.add(symbol);

      auto row = m.values.row(static_cast<std::size_t>(i));
      std::string_view rest(line);
      rest.remove_prefix(tab + 1);
      std::size_t count = 0;
      while (!rest.empty()) {
        const auto sp = rest.find(' ');
        const auto tok = rest.substr(0, sp);
        if (!tok.empty()) {
          if (count >= row.size())
            throw DimensionMismatch(path + ":" + std::to_string(lineno) + ": more than " + std::to_string(dim) +
                                    " values");
          try {
            row[count++] = parse_double(tok);
          } catch (const std::invalid_argument &e) {
            throw ParseError(path, lineno, e.what());
          }
        }
        if (sp == std::string_view::npos) break;
        rest.remove_prefix(sp + 1);
      }
      if (count != row.size())
        throw DimensionMismatch(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                                " values, found " + std::to_string(count));
    }
    blocks.push_back(std::move(m));
  }
  if (is.bad()) throw IoError("read from '" + path + "' failed");
  return blocks;
}

// Returns the unique block of the given kind.
inline const NamedMatrix &find_block(const std::vector<NamedMatrix> &blocks, std::string_view kind,
                                     const std::string &path) {
  const NamedMatrix *found = nullptr;
  for (const auto &b : blocks) {
    if (b.kind != kind) continue;
    if (found) throw Error(path + ": more than one '" + std::string(kind) + "' block");
    found = &b;
  }
  if (!found) throw Error(path + ": no '" + std::string(kind) + "' block");
  return *found;
}

}  // namespace relex
