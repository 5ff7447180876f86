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

// Aggregate precision/recall over ranked extractions.

#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "relex/extractor.hpp"
#include "relex/ingestion.hpp"
#include "relex/model_io.hpp"

namespace relex {

using Fact = std::tuple<std::string, std::string, std::string>;  // head, relation, tail

// Gold (head, relation, tail) facts; NA is rejected.
class GoldSet {
 public:
  GoldSet() = default;

  // Returns false for a duplicate.
  bool insert(Fact fact) {
    if (std::get<1>(fact) == kNoRelation) throw std::invalid_argument("GoldSet: NA is not a gold relationship");
    return facts_.insert(std::move(fact)).second;
  }

  bool contains(const std::string &head, const std::string &relation, const std::string &tail) const {
    return facts_.count(Fact{head, relation, tail}) > 0;
  }

  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }
  const std::set<Fact> &facts() const { return facts_; }

 private:
  std::set<Fact> facts_;
};

inline GoldSet read_gold(const std::string &path) {
  GoldSet gold;
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f.size() != 3) throw ParseError(path, lineno, "expected head<TAB>relation<TAB>tail");
    try {
      gold.insert({std::string(f[0]), std::string(f[1]), std::string(f[2])});
    } catch (const std::invalid_argument &e) {
      throw ParseError(path, lineno, e.what());
    }
  });
  return gold;
}

inline void write_gold(const std::string &path, const GoldSet &gold) {
  auto os = detail::open_output(path);
  for (const auto &[h, r, t] : gold.facts()) os << h << '\t' << r << '\t' << t << '\n';
  detail::finish_output(os, path);
}

struct PrPoint {
  std::size_t rank = 0;  // 1-based
  double recall = 0.0;
  double precision = 0.0;
  bool correct = false;
  std::size_t correct_so_far = 0;
  std::string head;
  std::string relation;
  std::string tail;
};

// One point per rank of the extraction list after sorting it by
// extraction_before. A repeated fact only counts as correct the first time.
inline std::vector<PrPoint> precision_recall_curve(std::span<const ScoredExtraction> extractions,
                                                   const GoldSet &gold) {
  if (gold.empty()) throw std::invalid_argument("precision_recall_curve: empty gold set");
  std::vector<ScoredExtraction> ranked(extractions.begin(), extractions.end());
  sort_extractions(ranked);
  std::vector<PrPoint> curve;
  curve.reserve(ranked.size());
  std::set<Fact> found;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto &x = ranked[i];
    const bool ok = gold.contains(x.head, x.relation, x.tail) && found.insert({x.head, x.relation, x.tail}).second;
    if (ok) ++hits;
    curve.push_back({i + 1, static_cast<double>(hits) / static_cast<double>(gold.size()),
                     static_cast<double>(hits) / static_cast<double>(i + 1), ok, hits, x.head, x.relation, x.tail});
  }
  return curve;
}

// Trapezoidal area under the curve over recall in [0, ceiling], divided by
// the ceiling. Only points with recall <= ceiling take part: the first one
// is extended flat to recall 0, and the segment crossing the ceiling is cut
// by linear interpolation. A curve whose first point already lies beyond
// the ceiling scores 0.
inline double area_under_pr(std::span<const PrPoint> curve, double ceiling) {
  if (!(ceiling > 0.0 && ceiling <= 1.0)) throw std::invalid_argument("area_under_pr: ceiling must lie in (0, 1]");
  if (curve.empty()) throw std::invalid_argument("area_under_pr: empty curve");
  if (curve.front().recall > ceiling) return 0.0;
  double prev_r = 0.0, prev_p = curve.front().precision;
  double area = 0.0;
  for (const auto &pt : curve) {
    if (pt.recall <= ceiling) {
      area += (pt.recall - prev_r) * (pt.precision + prev_p) / 2.0;
      prev_r = pt.recall;
      prev_p = pt.precision;
      continue;
    }
    const double frac = (ceiling - prev_r) / (pt.recall - prev_r);
    const double p_at = prev_p + frac * (pt.precision - prev_p);
    area += (ceiling - prev_r) * (prev_p + p_at) / 2.0;
    break;
  }
  return std::clamp(area / ceiling, 0.0, 1.0);
}

// Precision at the first rank whose recall reaches `target` (no
// interpolation), or 0 if the curve never gets there.
inline double precision_at_recall(std::span<const PrPoint> curve, double target) {
  for (const auto &pt : curve)
    if (pt.recall >= target) return pt.precision;
  return 0.0;
}

// rank \t recall \t precision \t correct \t head \t relation \t tail, with a
// header row and a trailing summary comment holding the AUC values.
inline void write_curve(const std::string &path, std::span<const PrPoint> curve) {
  auto os = detail::open_output(path);
  os << "rank\trecall\tprecision\tcorrect\thead\trelation\ttail\n";
  for (const auto &pt : curve)
    os << pt.rank << '\t' << format_double(pt.recall) << '\t' << format_double(pt.precision) << '\t'
       << (pt.correct ? 1 : 0) << '\t' << pt.head << '\t' << pt.relation << '\t' << pt.tail << '\n';
  if (!curve.empty())
    os << "# auc@0.1=" << format_double(area_under_pr(curve, 0.1))
       << "\tauc@1.0=" << format_double(area_under_pr(curve, 1.0)) << '\n';
  detail::finish_output(os, path);
}

}  // namespace relex
