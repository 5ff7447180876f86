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

// Translation-based KB scorer S(h, r, t) = -||h + r - t||^2 and its
// rank-based calibration.

#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relex/core.hpp"
#include "relex/ingestion.hpp"
#include "relex/model_io.hpp"
#include "relex/vocabulary.hpp"

namespace relex {

struct KBModel {
  Vocabulary entities;
  Vocabulary relations;
  EmbeddingMatrix entity_embeddings;
  EmbeddingMatrix relation_embeddings;

  std::size_t dim() const { return entity_embeddings.dim(); }
  std::size_t num_entities() const { return entities.size(); }
  std::size_t num_relations() const { return relations.size(); }
};

inline ModelConfig kb_default_config() {
  ModelConfig c;
  c.learning_rate = 0.1;
  return c;
}

struct KBTrainOptions {
  ModelConfig model = kb_default_config();
  // Stops after the first epoch that ends past this many seconds.
  std::optional<double> time_budget_seconds;
};

namespace detail {

inline void check_triple(const KBModel &m, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
  if (h >= m.num_entities() || t >= m.num_entities()) throw std::invalid_argument("KB: entity id out of range");
  if (r >= m.num_relations()) throw std::invalid_argument("KB: relationship id out of range");
}

// h + r - t
inline Vector translation_residual(const KBModel &m, const Triple &x) {
  const auto h = m.entity_embeddings.row(x.head);
  const auto r = m.relation_embeddings.row(x.relation);
  const auto t = m.entity_embeddings.row(x.tail);
  Vector out(h.size());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = h[d] + r[d] - t[d];
  return out;
}

}  // namespace detail

inline double score_kb(const KBModel &model, std::uint32_t head, std::uint32_t relation, std::uint32_t tail) {
  detail::check_triple(model, head, relation, tail);
  return -squared_norm(detail::translation_residual(model, {head, relation, tail}));
}

inline double score_kb(const KBModel &model, const Triple &t) { return score_kb(model, t.head, t.relation, t.tail); }

// S(h, r', t) for every relationship r', summed in the same order as
// score_kb so that ties agree exactly.
inline Vector score_all_relations(const KBModel &model, std::uint32_t head, std::uint32_t tail) {
  detail::check_triple(model, head, 0, tail);
  const auto h = model.entity_embeddings.row(head);
  const auto t = model.entity_embeddings.row(tail);
  Vector scores(model.num_relations());
  for (std::uint32_t r = 0; r < scores.size(); ++r) {
    const auto rv = model.relation_embeddings.row(r);
    double s = 0.0;
    for (std::size_t d = 0; d < h.size(); ++d) {
      const double x = h[d] + rv[d] - t[d];
      s += x * x;
    }
    scores[r] = -s;
  }
  return scores;
}

enum class CorruptSlot { kHead, kRelation, kTail };

// Replaces one slot with a uniformly drawn different id.
inline Triple sample_corruption(std::size_t num_entities, std::size_t num_relations, const Triple &triple,
                                CorruptSlot slot, Rng &rng) {
  const std::size_t n = slot == CorruptSlot::kRelation ? num_relations : num_entities;
  if (n < 2) throw std::invalid_argument("sample_corruption: slot vocabulary has fewer than two members");
  auto draw = [&](std::uint32_t current) {
    auto v = static_cast<std::uint32_t>(uniform_index(rng, n - 1));
    return v >= current ? v + 1 : v;
  };
  Triple out = triple;
  switch (slot) {
    case CorruptSlot::kHead: out.head = draw(triple.head); break;
    case CorruptSlot::kRelation: out.relation = draw(triple.relation); break;
    case CorruptSlot::kTail: out.tail = draw(triple.tail); break;
  }
  return out;
}

inline Triple sample_corruption(const TripleStore &store, const Triple &triple, CorruptSlot slot, Rng &rng) {
  return sample_corruption(store.entities().size(), store.relations().size(), triple, slot, rng);
}

// Gradient of max(0, margin + ||h+r-t||^2 - ||h'+r'-t'||^2), accumulated
// per row so that shared rows (the untouched slots) combine both terms.
inline HingeGradient kb_hinge_gradient(const KBModel &model, const Triple &pos, const Triple &neg, double margin) {
  detail::check_triple(model, pos.head, pos.relation, pos.tail);
  detail::check_triple(model, neg.head, neg.relation, neg.tail);
  const Vector res_pos = detail::translation_residual(model, pos);
  const Vector res_neg = detail::translation_residual(model, neg);

  HingeGradient out;
  out.loss = std::max(0.0, margin + squared_norm(res_pos) - squared_norm(res_neg));
  if (out.loss <= 0.0) return out;

  const std::size_t k = model.dim();
  std::map<std::pair<Table, std::uint32_t>, Vector> acc;
  auto add = [&](Table table, std::uint32_t row, const Vector &res, double sign) {
    auto &g = acc.try_emplace({table, row}, k, 0.0).first->second;
    for (std::size_t d = 0; d < k; ++d) g[d] += sign * 2.0 * res[d];
  };
  add(Table::kEntities, pos.head, res_pos, 1.0);
  add(Table::kRelations, pos.relation, res_pos, 1.0);
  add(Table::kEntities, pos.tail, res_pos, -1.0);
  add(Table::kEntities, neg.head, res_neg, -1.0);
  add(Table::kRelations, neg.relation, res_neg, -1.0);
  add(Table::kEntities, neg.tail, res_neg, 1.0);
  for (auto &[key, g] : acc) out.grads.push_back({key.first, key.second, std::move(g)});
  return out;
}

// One SGD step on a (positive, corrupted) pair; touched rows are projected.
inline double sgd_step_kb(KBModel &model, const Triple &pos, const Triple &neg, double learning_rate,
                          double margin = 1.0) {
  auto step = kb_hinge_gradient(model, pos, neg, margin);
  for (auto &g : step.grads) {
    auto row = g.table == Table::kEntities ? model.entity_embeddings.row(g.row) : model.relation_embeddings.row(g.row);
    for (std::size_t d = 0; d < row.size(); ++d) row[d] -= learning_rate * g.grad[d];
  }
  for (auto &g : step.grads) {
    if (g.table == Table::kEntities) model.entity_embeddings.project_row(g.row);
    else model.relation_embeddings.project_row(g.row);
  }
  return step.loss;
}

inline KBModel init_kb(Vocabulary entities, Vocabulary relations, std::size_t dim, Rng &rng) {
  KBModel model{std::move(entities), std::move(relations), {}, {}};
  model.entity_embeddings = EmbeddingMatrix(model.entities.size(), dim);
  model.relation_embeddings = EmbeddingMatrix(model.relations.size(), dim);
  init_uniform(model.entity_embeddings, rng);
  init_uniform(model.relation_embeddings, rng);
  return model;
}

// Each epoch visits every triple once in shuffled order; per triple one
// corruption slot is drawn uniformly among head, relationship and tail.
// Corrupted triples are not checked against the store.
inline KBModel train_kb(const TripleStore &store, const KBTrainOptions &opts,
                        const std::function<void(const EpochStats &)> &on_epoch = {}) {
  opts.model.validate();
  if (store.empty()) throw std::invalid_argument("train_kb: empty triple store");

  std::vector<CorruptSlot> slots;
  if (store.entities().size() >= 2) slots.push_back(CorruptSlot::kHead);
  if (store.relations().size() >= 2) slots.push_back(CorruptSlot::kRelation);
  if (store.entities().size() >= 2) slots.push_back(CorruptSlot::kTail);
  if (slots.empty()) throw std::invalid_argument("train_kb: nothing to corrupt (single entity and relationship)");

  Rng rng(opts.model.seed);
  KBModel model = init_kb(store.entities(), store.relations(), opts.model.dim, rng);
  const auto &triples = store.triples();
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= opts.model.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats{epoch, 0.0, 0};
    double total = 0.0;
    for (auto i : order) {
      const auto slot = slots[uniform_index(rng, slots.size())];
      const Triple neg = sample_corruption(store, triples[i], slot, rng);
      const double loss = sgd_step_kb(model, triples[i], neg, opts.model.learning_rate, opts.model.margin);
      if (!std::isfinite(loss))
        throw TrainingError("train_kb: non-finite loss at epoch " + std::to_string(epoch) + ", triple (" +
                            store.entities().token_of(triples[i].head) + ", " +
                            store.relations().token_of(triples[i].relation) + ", " +
                            store.entities().token_of(triples[i].tail) + ")");
      total += loss;
      if (loss > 0.0) ++stats.violations;
    }
    stats.mean_hinge = total / static_cast<double>(triples.size());
    if (on_epoch) on_epoch(stats);
    if (opts.time_budget_seconds) {
      std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() >= *opts.time_budget_seconds) break;
    }
  }
  return model;
}

// Number of relationships r' != r that r strictly beats: higher is better.
inline std::size_t rank_relation(const KBModel &model, std::uint32_t head, std::uint32_t relation,
                                 std::uint32_t tail) {
  detail::check_triple(model, head, relation, tail);
  const Vector s = score_all_relations(model, head, tail);
  std::size_t beaten = 0;
  for (std::uint32_t r = 0; r < s.size(); ++r)
    if (r != relation && s[relation] > s[r]) ++beaten;
  return beaten;
}

// Number of relationships scoring strictly above r: the 0-based rank
// position, with ties resolved in r's favour.
inline std::size_t rank_position(const KBModel &model, std::uint32_t head, std::uint32_t relation,
                                 std::uint32_t tail) {
  detail::check_triple(model, head, relation, tail);
  const Vector s = score_all_relations(model, head, tail);
  std::size_t above = 0;
  for (std::uint32_t r = 0; r < s.size(); ++r)
    if (r != relation && s[r] > s[relation]) ++above;
  return above;
}

enum class CalibrationDirection {
  kRankPosition,  // 1 iff fewer than `threshold` relationships beat r
  kBeatenCount,   // 1 iff r beats fewer than `threshold` relationships
};

inline int calibrated_score(const KBModel &model, std::uint32_t head, std::uint32_t relation, std::uint32_t tail,
                            std::size_t threshold,
                            CalibrationDirection direction = CalibrationDirection::kRankPosition) {
  if (threshold < 1) throw std::invalid_argument("calibrated_score: threshold must be >= 1");
  const std::size_t x = direction == CalibrationDirection::kRankPosition ? rank_position(model, head, relation, tail)
                                                                         : rank_relation(model, head, relation, tail);
  return x < threshold ? 1 : 0;
}

inline void save_kb_model(const std::string &path, const KBModel &m) {
  const NamedMatrix blocks[] = {{"entities", m.entities, m.entity_embeddings},
                                {"relationships", m.relations, m.relation_embeddings}};
  save_model(path, blocks);
}

inline KBModel load_kb_model(const std::string &path) {
  auto blocks = load_model(path);
  const auto &e = find_block(blocks, "entities", path);
  const auto &r = find_block(blocks, "relationships", path);
  if (e.values.dim() != r.values.dim())
    throw DimensionMismatch(path + ": entity dim " + std::to_string(e.values.dim()) + " != relationship dim " +
                            std::to_string(r.values.dim()));
  return {e.symbols, r.symbols, e.values, r.values};
}

}  // namespace relex
