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

// Corpus ingestion: mention and triple files, vocabularies, and the KB
// filtering protocol applied before training.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relex/core.hpp"
#include "relex/vocabulary.hpp"

namespace relex {

// The distinguished no-relation label.
inline constexpr std::string_view kNoRelation = "NA";

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

// Calls fn(fields, lineno) for each non-empty line of a TSV file.
template <class Fn>
void for_each_tsv_line(const std::string &path, Fn &&fn) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto view = strip_cr(line);
    if (view.empty()) continue;
    fn(split(view, '\t'), lineno);
  }
  if (is.bad()) throw IoError("read from '" + path + "' failed");
}

inline std::ofstream open_output(const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

inline void finish_output(std::ofstream &os, const std::string &path) {
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

// A mention as it appears on disk, before feature encoding.
struct RawMention {
  std::string id;
  std::string head;
  std::string tail;
  std::string label;
  std::vector<std::string> features;

  bool operator==(const RawMention &) const = default;
};

struct MentionRecord {
  std::string id;
  std::string head;
  std::string tail;
  std::string label;  // a relationship token or kNoRelation
  SparseVector features;

  bool operator==(const MentionRecord &) const = default;
};

// mention_id \t head \t tail \t label \t feat1 feat2 ...
inline RawMention parse_mention_line(std::string_view line, const std::string &source, std::size_t lineno) {
  auto fields = detail::split(detail::strip_cr(line), '\t');
  if (fields.size() != 5)
    throw ParseError(source, lineno, "expected 5 tab-separated fields, found " + std::to_string(fields.size()));
  for (int i = 0; i < 4; ++i)
    if (fields[i].empty()) throw ParseError(source, lineno, "empty field " + std::to_string(i + 1));
  RawMention m{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), std::string(fields[3]), {}};
  for (auto tok : detail::split(fields[4], ' '))
    if (!tok.empty()) m.features.emplace_back(tok);
  return m;
}

inline std::vector<RawMention> read_mentions(const std::string &path) {
  std::vector<RawMention> out;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::strip_cr(line).empty()) continue;
    out.push_back(parse_mention_line(line, path, lineno));
  }
  if (is.bad()) throw IoError("read from '" + path + "' failed");
  return out;
}

inline void write_mentions(const std::string &path, std::span<const RawMention> mentions) {
  auto os = detail::open_output(path);
  for (const auto &m : mentions) {
    os << m.id << '\t' << m.head << '\t' << m.tail << '\t' << m.label << '\t';
    for (std::size_t i = 0; i < m.features.size(); ++i) os << (i ? " " : "") << m.features[i];
    os << '\n';
  }
  detail::finish_output(os, path);
}

// Document frequency (one count per mention) of every feature token.
inline std::map<std::string, std::size_t, std::less<>> feature_counts(std::span<const RawMention> mentions) {
  std::map<std::string, std::size_t, std::less<>> counts;
  std::vector<std::string_view> seen;
  for (const auto &m : mentions) {
    seen.assign(m.features.begin(), m.features.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto tok : seen) {
      auto it = counts.find(tok);
      if (it == counts.end()) counts.emplace(std::string(tok), 1);
      else ++it->second;
    }
  }
  return counts;
}

// Keeps the max_features most frequent tokens. Ties go to the
// lexicographically smaller token; ids follow that order.
inline Vocabulary build_feature_vocabulary(std::span<const RawMention> mentions, std::size_t max_features) {
  if (max_features < 1) throw std::invalid_argument("build_feature_vocabulary: max_features must be >= 1");
  auto counts = feature_counts(mentions);
  std::vector<std::pair<std::string_view, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
  Vocabulary vocab;
  for (std::size_t i = 0; i < ranked.size() && i < max_features; ++i) vocab.add(ranked[i].first);
  return vocab;
}

inline MentionRecord encode_mention(const RawMention &raw, const Vocabulary &features) {
  std::vector<std::uint32_t> ids;
  ids.reserve(raw.features.size());
  for (const auto &tok : raw.features)
    if (auto id = features.find(tok)) ids.push_back(*id);
  return {raw.id, raw.head, raw.tail, raw.label, SparseVector(std::move(ids))};
}

inline std::vector<MentionRecord> encode_mentions(std::span<const RawMention> raw, const Vocabulary &features) {
  std::vector<MentionRecord> out;
  out.reserve(raw.size());
  for (const auto &m : raw) out.push_back(encode_mention(m, features));
  return out;
}

struct Triple {
  std::uint32_t head = 0;
  std::uint32_t relation = 0;
  std::uint32_t tail = 0;

  auto operator<=>(const Triple &) const = default;
};

enum class VocabPolicy { kExtend, kValidate };

// Deduplicated KB triples with head, tail and (head, tail) indexes.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(Vocabulary entities, Vocabulary relations)
      : entities_(std::move(entities)), relations_(std::move(relations)) {}

  // Returns false when the triple is already present.
  bool insert(const Triple &t) {
    if (t.head >= entities_.size() || t.tail >= entities_.size() || t.relation >= relations_.size())
      throw std::invalid_argument("TripleStore: id out of range");
    if (!present_.insert(t).second) return false;
    const auto idx = static_cast<std::uint32_t>(triples_.size());
    triples_.push_back(t);
    by_pair_[{t.head, t.tail}].push_back(idx);
    by_head_[t.head].push_back(idx);
    by_tail_[t.tail].push_back(idx);
    return true;
  }

  // Adds unknown tokens to the vocabularies.
  bool insert(std::string_view head, std::string_view relation, std::string_view tail) {
    Triple t{entities_.add(head), relations_.add(relation), 0};
    t.tail = entities_.add(tail);
    return insert(t);
  }

  bool contains(const Triple &t) const { return present_.count(t) > 0; }

  const std::vector<Triple> &triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const Vocabulary &entities() const { return entities_; }
  const Vocabulary &relations() const { return relations_; }

  // Indexes into triples().
  std::span<const std::uint32_t> with_pair(std::uint32_t head, std::uint32_t tail) const {
    return lookup(by_pair_, std::pair{head, tail});
  }
  std::span<const std::uint32_t> with_head(std::uint32_t head) const { return lookup(by_head_, head); }
  std::span<const std::uint32_t> with_tail(std::uint32_t tail) const { return lookup(by_tail_, tail); }

 private:
  template <class Map, class Key>
  static std::span<const std::uint32_t> lookup(const Map &m, const Key &k) {
    auto it = m.find(k);
    if (it == m.end()) return {};
    return it->second;
  }

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::set<Triple> present_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> by_pair_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_head_;
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_tail_;
};

// head \t relation \t tail
inline TripleStore load_triples(const std::string &path, Vocabulary entities = {}, Vocabulary relations = {},
                                VocabPolicy policy = VocabPolicy::kExtend) {
  TripleStore store(std::move(entities), std::move(relations));
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f.size() != 3)
      throw ParseError(path, lineno, "expected 3 tab-separated fields, found " + std::to_string(f.size()));
    for (auto field : f)
      if (field.empty()) throw ParseError(path, lineno, "empty field");
    if (policy == VocabPolicy::kValidate) {
      auto h = store.entities().find(f[0]);
      auto r = store.relations().find(f[1]);
      auto t = store.entities().find(f[2]);
      if (!h || !t) throw ParseError(path, lineno, "unknown entity");
      if (!r) throw ParseError(path, lineno, "unknown relationship '" + std::string(f[1]) + "'");
      store.insert(Triple{*h, *r, *t});
    } else {
      store.insert(f[0], f[1], f[2]);
    }
  });
  return store;
}

inline void write_triples(const std::string &path, const TripleStore &store) {
  auto os = detail::open_output(path);
  for (const auto &t : store.triples())
    os << store.entities().token_of(t.head) << '\t' << store.relations().token_of(t.relation) << '\t'
       << store.entities().token_of(t.tail) << '\n';
  detail::finish_output(os, path);
}

using RelationMap = std::map<std::string, std::string, std::less<>>;

// old_token \t new_token; an old token may not map to two different targets.
inline RelationMap read_relation_map(const std::string &path) {
  RelationMap map;
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f.size() != 2 || f[0].empty() || f[1].empty())
      throw ParseError(path, lineno, "expected old_token<TAB>new_token");
    auto [it, inserted] = map.emplace(std::string(f[0]), std::string(f[1]));
    if (!inserted && it->second != f[1])
      throw ParseError(path, lineno, "'" + it->first + "' mapped to more than one relationship");
  });
  return map;
}

inline const std::string &remap_token(const std::string &token, const RelationMap &map) {
  auto it = map.find(token);
  return it == map.end() ? token : it->second;
}

// Relabels a triple store; relationships that collapse onto the same new
// token merge, and the resulting duplicate triples are dropped.
inline TripleStore remap_relations(const TripleStore &store, const RelationMap &map) {
  Vocabulary relations;
  std::vector<std::uint32_t> new_id(store.relations().size());
  for (std::uint32_t r = 0; r < store.relations().size(); ++r)
    new_id[r] = relations.add(remap_token(store.relations().token_of(r), map));
  TripleStore out(store.entities(), std::move(relations));
  for (const auto &t : store.triples()) out.insert(Triple{t.head, new_id[t.relation], t.tail});
  return out;
}

// Relabels any mention-like record with a `label` member.
template <class Record>
  requires requires(Record r) { r.label; }
std::vector<Record> remap_relations(std::span<const Record> records, const RelationMap &map) {
  std::vector<Record> out(records.begin(), records.end());
  for (auto &r : out) r.label = remap_token(r.label, map);
  return out;
}

using EntityPair = std::pair<std::string, std::string>;

// head_token \t tail_token
inline std::vector<EntityPair> read_entity_pairs(const std::string &path) {
  std::vector<EntityPair> out;
  detail::for_each_tsv_line(path, [&](const std::vector<std::string_view> &f, std::size_t lineno) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) throw ParseError(path, lineno, "expected head<TAB>tail");
    out.emplace_back(std::string(f[0]), std::string(f[1]));
  });
  return out;
}

inline void write_entity_pairs(const std::string &path, std::span<const EntityPair> pairs) {
  auto os = detail::open_output(path);
  for (const auto &[h, t] : pairs) os << h << '\t' << t << '\n';
  detail::finish_output(os, path);
}

// Drops every triple whose entity pair, in either orientation, is a test
// pair, whatever its relationship. Vocabularies and ids are preserved.
inline TripleStore filter_kb_by_test_pairs(const TripleStore &store, std::span<const EntityPair> test_pairs) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> banned;
  for (const auto &[h, t] : test_pairs) {
    auto hid = store.entities().find(h);
    auto tid = store.entities().find(t);
    if (!hid || !tid) continue;
    banned.emplace(*hid, *tid);
    banned.emplace(*tid, *hid);
  }
  TripleStore out(store.entities(), store.relations());
  for (const auto &t : store.triples())
    if (!banned.count({t.head, t.tail})) out.insert(t);
  return out;
}

}  // namespace relex
