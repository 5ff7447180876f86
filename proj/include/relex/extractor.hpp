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

// Entity-pair level extraction: mention scores are summed over all mentions
// of a pair, and the winning relationship optionally gains the calibrated KB
// score.

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "relex/core.hpp"
#include "relex/ingestion.hpp"
#include "relex/kbembed.hpp"
#include "relex/mention2rel.hpp"
#include "relex/model_io.hpp"

namespace relex {

struct ScoredExtraction {
  std::string head;
  std::string relation;  // never kNoRelation
  std::string tail;
  double score = 0.0;
  std::size_t num_mentions = 0;

  bool operator==(const ScoredExtraction &) const = default;
};

// Score descending, then (head, relation, tail) ascending.
inline bool extraction_before(const ScoredExtraction &a, const ScoredExtraction &b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
}

inline void sort_extractions(std::vector<ScoredExtraction> &xs) {
  std::sort(xs.begin(), xs.end(), extraction_before);
}

using MentionGroups = std::map<EntityPair, std::vector<MentionRecord>>;

// Partitions mentions by ordered (head, tail); input order is kept per pair.
inline MentionGroups group_mentions(std::span<const MentionRecord> mentions) {
  MentionGroups groups;
  for (const auto &m : mentions) groups[{m.head, m.tail}].push_back(m);
  return groups;
}

struct AggregatePrediction {
  std::uint32_t relation = 0;
  double score = 0.0;
};

// argmax over relationships (NA included) of the summed mention scores.
inline AggregatePrediction aggregate_predict(const M2RModel &model, std::span<const MentionRecord> mentions) {
  if (mentions.empty()) throw std::invalid_argument("aggregate_predict: empty mention list");
  Vector total(model.num_relations(), 0.0);
  for (const auto &m : mentions) {
    const Vector s = score_all_m2r(model, m.features);
    for (std::size_t r = 0; r < total.size(); ++r) total[r] += s[r];
  }
  const auto best = argmax_lowest(total);
  return {best, total[best]};
}

struct CalibrationOptions {
  std::size_t threshold = 10;
  CalibrationDirection direction = CalibrationDirection::kRankPosition;
};

// Aggregate mention score plus the binary calibrated KB score. Entities or
// relationships unknown to the KB model contribute 0.
inline double composite_score(const KBModel &kb, std::string_view head, std::string_view relation,
                              std::string_view tail, double mention_score, const CalibrationOptions &calib) {
  if (relation == kNoRelation) throw std::invalid_argument("composite_score: relation is NA");
  auto h = kb.entities.find(head);
  auto r = kb.relations.find(relation);
  auto t = kb.entities.find(tail);
  if (!h || !r || !t) return mention_score;
  return mention_score + calibrated_score(kb, *h, *r, *t, calib.threshold, calib.direction);
}

enum class Fusion { kMentionOnly, kMentionPlusKb };

struct ExtractOptions {
  Fusion fusion = Fusion::kMentionPlusKb;
  CalibrationOptions calibration;
};

// One extraction per entity pair whose prediction is not NA, sorted by
// extraction_before. `kb` may be null in mention-only mode.
inline std::vector<ScoredExtraction> extract_all(const M2RModel &m2r, const KBModel *kb,
                                                 std::span<const MentionRecord> mentions,
                                                 const ExtractOptions &opts) {
  if (opts.fusion == Fusion::kMentionPlusKb && kb == nullptr)
    throw std::invalid_argument("extract_all: fusion mode needs a KB model");
  if (kb && opts.fusion == Fusion::kMentionPlusKb && kb->dim() != m2r.dim())
    throw DimensionMismatch("extract_all: mention model dim " + std::to_string(m2r.dim()) + " != KB model dim " +
                            std::to_string(kb->dim()));
  std::vector<ScoredExtraction> out;
  for (const auto &[pair, group] : group_mentions(mentions)) {
    const auto pred = aggregate_predict(m2r, group);
    const auto &relation = m2r.relations.token_of(pred.relation);
    if (relation == kNoRelation) continue;
    double score = pred.score;
    if (opts.fusion == Fusion::kMentionPlusKb)
      score = composite_score(*kb, pair.first, relation, pair.second, pred.score, opts.calibration);
    out.push_back({pair.first, relation, pair.second, score, group.size()});
  }
  sort_extractions(out);
  return out;
}

// head \t relation \t tail \t score \t num_mentions
inline void write_extractions(const std::string &path, std::span<const ScoredExtraction> xs) {
  auto os = detail::open_output(path);
  for (const auto &x : xs)
    os << x.head << '\t' << x.relation << '\t' << x.tail << '\t' << format_double(x.score) << '\t' << x.num_mentions
       << '\n';
  detail::finish_output(os, path);
}

inline std::vector<ScoredExtraction> read_extractions(const std::string &path) {
  std::vector<ScoredExtraction> out;
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f.size() != 5) throw ParseError(path, lineno, "expected 5 tab-separated fields");
    ScoredExtraction x{std::string(f[0]), std::string(f[1]), std::string(f[2]), 0.0, 0};
    try {
      x.score = parse_double(f[3]);
      x.num_mentions = static_cast<std::size_t>(std::stoull(std::string(f[4])));
    } catch (const std::exception &e) {
      throw ParseError(path, lineno, e.what());
    }
    out.push_back(std::move(x));
  });
  return out;
}

}  // namespace relex
