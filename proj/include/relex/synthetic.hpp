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

// Desk-scale synthetic corpora: a KB with planted translation structure and
// a weakly labeled mention corpus whose entity pairs are drawn against it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "relex/core.hpp"
#include "relex/evaluation.hpp"
#include "relex/ingestion.hpp"

namespace relex {

struct PlantedKbConfig {
  std::size_t num_entities = 100;
  std::size_t num_relations = 10;
  std::size_t num_clusters = 10;
  // 0 keeps every planted triple.
  std::size_t num_triples = 0;
  std::uint64_t seed = 1;
};

// Entities are split into clusters and relationship r links a source
// cluster to a target cluster (distinct ordered pairs across relationships).
// Every (source member, target member) pair of r is a planted triple, so a
// translation model fits the KB exactly: one point per cluster, and r equal
// to the target point minus the source point.
class PlantedKb {
 public:
  explicit PlantedKb(const PlantedKbConfig &cfg) : cfg_(cfg) {
    if (cfg.num_clusters < 2 || cfg.num_entities < cfg.num_clusters)
      throw std::invalid_argument("PlantedKb: need >= 2 clusters and at least one entity per cluster");
    if (cfg.num_relations < 1 || cfg.num_relations > cfg.num_clusters * (cfg.num_clusters - 1))
      throw std::invalid_argument("PlantedKb: relationships must map to distinct ordered cluster pairs");
    Rng rng(cfg.seed);
    std::vector<std::uint32_t> perm(cfg.num_entities);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    cluster_of_.resize(cfg.num_entities);
    members_.resize(cfg.num_clusters);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      cluster_of_[perm[i]] = static_cast<std::uint32_t>(i % cfg.num_clusters);
      members_[i % cfg.num_clusters].push_back(perm[i]);
    }
    for (auto &m : members_) std::sort(m.begin(), m.end());

    std::vector<std::pair<std::uint32_t, std::uint32_t>> links;
    for (std::uint32_t a = 0; a < cfg.num_clusters; ++a)
      for (std::uint32_t b = 0; b < cfg.num_clusters; ++b)
        if (a != b) links.emplace_back(a, b);
    std::shuffle(links.begin(), links.end(), rng);
    links.resize(cfg.num_relations);
    links_ = std::move(links);

    char buf[32];
    for (std::size_t e = 0; e < cfg.num_entities; ++e) {
      std::snprintf(buf, sizeof(buf), "e%05zu", e);
      entities_.add(buf);
    }
    for (std::size_t r = 0; r < cfg.num_relations; ++r) {
      std::snprintf(buf, sizeof(buf), "/synth/rel_%03zu", r);
      relations_.add(buf);
    }
  }

  const Vocabulary &entities() const { return entities_; }
  const Vocabulary &relations() const { return relations_; }

  std::uint32_t cluster_of(std::uint32_t entity) const { return cluster_of_.at(entity); }
  const std::vector<std::uint32_t> &members(std::uint32_t cluster) const { return members_.at(cluster); }
  std::uint32_t source_cluster(std::uint32_t relation) const { return links_.at(relation).first; }
  std::uint32_t target_cluster(std::uint32_t relation) const { return links_.at(relation).second; }

  bool consistent(const Triple &t) const {
    return cluster_of(t.head) == source_cluster(t.relation) && cluster_of(t.tail) == target_cluster(t.relation);
  }

  // The relationship planted between two clusters, if any.
  std::optional<std::uint32_t> link(std::uint32_t source, std::uint32_t target) const {
    for (std::uint32_t r = 0; r < links_.size(); ++r)
      if (links_[r] == std::pair{source, target}) return r;
    return std::nullopt;
  }

  // All planted triples, or a seeded sample of num_triples of them.
  TripleStore triples() const {
    std::vector<Triple> all;
    for (std::uint32_t r = 0; r < links_.size(); ++r)
      for (auto h : members_[links_[r].first])
        for (auto t : members_[links_[r].second]) all.push_back({h, r, t});
    if (cfg_.num_triples != 0 && cfg_.num_triples < all.size()) {
      Rng rng(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
      std::shuffle(all.begin(), all.end(), rng);
      all.resize(cfg_.num_triples);
    }
    TripleStore store(entities_, relations_);
    for (const auto &t : all) store.insert(t);
    return store;
  }

 private:
  PlantedKbConfig cfg_;
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<std::uint32_t> cluster_of_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> links_;
};

struct SyntheticConfig {
  std::size_t num_entities = 200;
  std::size_t num_relations = 20;  // excluding NA
  std::size_t num_features = 500;
  std::size_t num_mentions = 5000;  // train and test together
  double noise_rate = 0.2;
  std::uint64_t seed = 1;

  double na_pair_fraction = 0.5;
  double test_pair_fraction = 0.3;
  std::size_t max_mentions_per_pair = 5;
  std::size_t indicative_per_label = 8;
  std::size_t indicative_per_mention = 2;
  std::size_t background_per_mention = 4;
  // Fraction of relation-bearing pairs drawn consistent with the planted KB.
  double kb_corroboration = 0.6;
  std::size_t num_clusters = 20;

  void validate() const {
    if (num_entities < 4 || num_relations < 2 || num_features < 1 || num_mentions < 1)
      throw std::invalid_argument("SyntheticConfig: need >= 4 entities, >= 2 relations and nonzero counts");
    if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw std::invalid_argument("SyntheticConfig: noise rate not in [0, 1)");
    for (double p : {na_pair_fraction, test_pair_fraction, kb_corroboration})
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SyntheticConfig: fraction not in [0, 1]");
    if (max_mentions_per_pair < 1 || indicative_per_label < 1 || indicative_per_mention < 1)
      throw std::invalid_argument("SyntheticConfig: per-pair and per-mention counts must be >= 1");
    if (indicative_per_mention > indicative_per_label)
      throw std::invalid_argument("SyntheticConfig: indicative_per_mention exceeds indicative_per_label");
    if ((num_relations + 1) * indicative_per_label + background_per_mention > num_features)
      throw std::invalid_argument("SyntheticConfig: too few features for the indicative sets");
  }
};

struct SyntheticCorpus {
  std::vector<RawMention> train_mentions;
  std::vector<RawMention> test_mentions;
  TripleStore kb;  // every planted triple, before test-pair filtering
  GoldSet gold;    // relation-bearing test pairs
  std::vector<EntityPair> test_pairs;
  std::set<Fact> corroborated;  // gold facts consistent with the planted KB
  std::size_t planted_relation_pairs = 0;  // relation-bearing test pairs generated
};

// Each label (relationships and NA) owns a block of indicative features; the
// remaining features are background. A mention takes its indicative tokens
// from its pair's label. For relation-bearing pairs, with probability
// noise_rate it takes them from a distractor relationship fixed per pair
// instead: the weak label then disagrees with what the text expresses.
inline SyntheticCorpus generate_synthetic(const SyntheticConfig &cfg) {
  cfg.validate();
  PlantedKb planted({cfg.num_entities, cfg.num_relations, cfg.num_clusters, 0, cfg.seed});
  SyntheticCorpus out;
  out.kb = planted.triples();

  Rng rng(cfg.seed + 1);
  std::bernoulli_distribution is_na(cfg.na_pair_fraction), is_test(cfg.test_pair_fraction),
      is_noisy(cfg.noise_rate), is_consistent(cfg.kb_corroboration);

  const std::size_t n_labels = cfg.num_relations + 1;  // last one is NA
  const std::size_t na_label = cfg.num_relations;
  const std::size_t first_background = n_labels * cfg.indicative_per_label;
  auto feature_token = [](std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "f%05zu", id);
    return std::string(buf);
  };
  auto label_token = [&](std::size_t label) {
    return label == na_label ? std::string(kNoRelation) : planted.relations().token_of(static_cast<std::uint32_t>(label));
  };

  std::set<std::pair<std::uint32_t, std::uint32_t>> used;  // unordered: both orientations stored
  auto linked = [&](std::uint32_t h, std::uint32_t t) {
    return !out.kb.with_pair(h, t).empty() || !out.kb.with_pair(t, h).empty();
  };
  auto free_pair = [&](std::uint32_t h, std::uint32_t t) { return h != t && !used.count({h, t}); };

  std::size_t produced = 0;
  while (produced < cfg.num_mentions) {
    std::uint32_t h = 0, t = 0;
    std::size_t label = na_label;
    bool consistent = false;
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      h = static_cast<std::uint32_t>(uniform_index(rng, cfg.num_entities));
      if (is_na(rng)) {
        label = na_label;
        t = static_cast<std::uint32_t>(uniform_index(rng, cfg.num_entities));
        found = free_pair(h, t) && !linked(h, t);
      } else {
        label = uniform_index(rng, cfg.num_relations);
        consistent = is_consistent(rng);
        const auto rel = static_cast<std::uint32_t>(label);
        if (consistent) {
          const auto &src = planted.members(planted.source_cluster(rel));
          const auto &dst = planted.members(planted.target_cluster(rel));
          h = src[uniform_index(rng, src.size())];
          t = dst[uniform_index(rng, dst.size())];
          found = free_pair(h, t);
        } else {
          t = static_cast<std::uint32_t>(uniform_index(rng, cfg.num_entities));
          found = free_pair(h, t) && !linked(h, t);
        }
      }
    }
    if (!found) throw std::invalid_argument("generate_synthetic: entity set too small for the requested pairs");
    used.insert({h, t});
    used.insert({t, h});

    // Distractor: a different relationship, never NA.
    std::size_t distractor = uniform_index(rng, cfg.num_relations - (label == na_label ? 0 : 1));
    if (label != na_label && distractor >= label) ++distractor;

    const bool test = is_test(rng);
    const std::string head = planted.entities().token_of(h), tail = planted.entities().token_of(t);
    const std::string label_tok = label_token(label);
    if (test) {
      out.test_pairs.emplace_back(head, tail);
      if (label != na_label) {
        out.gold.insert({head, label_tok, tail});
        ++out.planted_relation_pairs;
        if (consistent) out.corroborated.insert({head, label_tok, tail});
      }
    }

    const std::size_t n_mentions =
        std::min(cfg.num_mentions - produced, 1 + uniform_index(rng, cfg.max_mentions_per_pair));
    for (std::size_t i = 0; i < n_mentions; ++i) {
      const std::size_t source = label != na_label && is_noisy(rng) ? distractor : label;
      std::vector<std::size_t> picks(cfg.indicative_per_label);
      std::iota(picks.begin(), picks.end(), source * cfg.indicative_per_label);
      std::shuffle(picks.begin(), picks.end(), rng);
      picks.resize(cfg.indicative_per_mention);
      for (std::size_t b = 0; b < cfg.background_per_mention; ++b)
        picks.push_back(first_background + uniform_index(rng, cfg.num_features - first_background));
      std::shuffle(picks.begin(), picks.end(), rng);

      char id[32];
      std::snprintf(id, sizeof(id), "m%07zu", produced);
      RawMention m{id, head, tail, label_tok, {}};
      for (auto f : picks) m.features.push_back(feature_token(f));
      (test ? out.test_mentions : out.train_mentions).push_back(std::move(m));
      ++produced;
    }
  }
  return out;
}

}  // namespace relex
