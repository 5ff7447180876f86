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

// Mention -> relationship scorer: S(m, r) = (W^T phi(m)) . r, trained with
// a margin ranking loss over sampled negative relationships.

#pragma once

#include <algorithm>
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

enum class ConstraintMode {
  kPerMention,    // f(m_i).r_i > 1 + f(m_i).r'
  kCrossMention,  // f(m_i).r_i > 1 + f(m_j).r' for sampled m_j
};

struct M2RTrainOptions {
  ModelConfig model;
  ConstraintMode mode = ConstraintMode::kCrossMention;
  // In cross-mention mode, probability that the negative uses a mention
  // drawn independently of the positive one (otherwise the same mention).
  double cross_mention_rate = 1.0;
};

struct M2RModel {
  Vocabulary features;
  Vocabulary relations;  // includes kNoRelation
  EmbeddingMatrix words;
  EmbeddingMatrix relation_embeddings;

  std::size_t dim() const { return words.dim(); }
  std::size_t num_relations() const { return relations.size(); }
};

// Sorted distinct non-NA labels, followed by NA.
inline Vocabulary make_relation_vocabulary(std::span<const MentionRecord> data) {
  std::vector<std::string> labels;
  for (const auto &m : data)
    if (m.label != kNoRelation) labels.push_back(m.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  Vocabulary vocab(labels);
  vocab.add(kNoRelation);
  return vocab;
}

inline double score_m2r(const M2RModel &model, const SparseVector &mention, std::uint32_t relation) {
  if (relation >= model.num_relations())
    throw std::invalid_argument("score_m2r: relation id " + std::to_string(relation) + " out of range");
  return dot(sparse_project(mention, model.words), model.relation_embeddings.row(relation));
}

// Scores of every relationship, computing f(m) once.
inline Vector score_all_m2r(const M2RModel &model, const SparseVector &mention) {
  const Vector f = sparse_project(mention, model.words);
  Vector scores(model.num_relations());
  for (std::uint32_t r = 0; r < scores.size(); ++r) scores[r] = dot(f, model.relation_embeddings.row(r));
  return scores;
}

// Index of the largest entry; ties go to the lowest index.
inline std::uint32_t argmax_lowest(std::span<const double> scores) {
  std::uint32_t best = 0;
  for (std::uint32_t r = 1; r < scores.size(); ++r)
    if (scores[r] > scores[best]) best = r;
  return best;
}

inline std::uint32_t predict_relation(const M2RModel &model, const SparseVector &mention) {
  return argmax_lowest(score_all_m2r(model, mention));
}

// Hinge max(0, margin - S(pos_m, pos_r) + S(neg_m, neg_r)) and its gradient.
// At the kink (loss exactly 0) the zero branch is taken.
inline HingeGradient m2r_hinge_gradient(const M2RModel &model, const SparseVector &pos_mention,
                                        std::uint32_t pos_relation, const SparseVector &neg_mention,
                                        std::uint32_t neg_relation, double margin) {
  if (pos_relation == neg_relation)
    throw std::invalid_argument("m2r step: negative relationship equals the positive one");
  if (pos_relation >= model.num_relations() || neg_relation >= model.num_relations())
    throw std::invalid_argument("m2r step: relation id out of range");
  const Vector f_pos = sparse_project(pos_mention, model.words);
  const Vector f_neg = sparse_project(neg_mention, model.words);
  const auto r_pos = model.relation_embeddings.row(pos_relation);
  const auto r_neg = model.relation_embeddings.row(neg_relation);

  HingeGradient out;
  out.loss = std::max(0.0, margin - dot(f_pos, r_pos) + dot(f_neg, r_neg));
  if (out.loss <= 0.0) return out;

  const std::size_t k = model.dim();
  std::map<std::uint32_t, Vector> word_grads;
  for (auto id : pos_mention.indices()) {
    auto &g = word_grads.try_emplace(id, k, 0.0).first->second;
    for (std::size_t d = 0; d < k; ++d) g[d] -= r_pos[d];
  }
  for (auto id : neg_mention.indices()) {
    auto &g = word_grads.try_emplace(id, k, 0.0).first->second;
    for (std::size_t d = 0; d < k; ++d) g[d] += r_neg[d];
  }
  Vector g_pos(k), g_neg(k);
  for (std::size_t d = 0; d < k; ++d) {
    g_pos[d] = -f_pos[d];
    g_neg[d] = f_neg[d];
  }
  out.grads.push_back({Table::kRelations, pos_relation, std::move(g_pos)});
  out.grads.push_back({Table::kRelations, neg_relation, std::move(g_neg)});
  for (auto &[id, g] : word_grads) out.grads.push_back({Table::kFeatures, id, std::move(g)});
  return out;
}

// Applies one SGD step on a single ranking constraint and projects every
// touched row back into the unit ball. Returns the hinge loss before the
// update; a zero loss leaves the model untouched.
inline double sgd_step_m2r(M2RModel &model, const SparseVector &pos_mention, std::uint32_t pos_relation,
                           const SparseVector &neg_mention, std::uint32_t neg_relation, double learning_rate,
                           double margin = 1.0) {
  auto step = m2r_hinge_gradient(model, pos_mention, pos_relation, neg_mention, neg_relation, margin);
  for (auto &g : step.grads) {
    auto row = g.table == Table::kFeatures ? model.words.row(g.row) : model.relation_embeddings.row(g.row);
    for (std::size_t d = 0; d < row.size(); ++d) row[d] -= learning_rate * g.grad[d];
  }
  for (auto &g : step.grads) {
    if (g.table == Table::kFeatures) model.words.project_row(g.row);
    else model.relation_embeddings.project_row(g.row);
  }
  return step.loss;
}

// Uniform relationship id different from `exclude`.
inline std::uint32_t sample_other(Rng &rng, std::size_t n, std::uint32_t exclude) {
  auto r = static_cast<std::uint32_t>(uniform_index(rng, n - 1));
  return r >= exclude ? r + 1 : r;
}

using EpochCallback = std::function<void(const EpochStats &)>;

inline M2RModel init_m2r(Vocabulary features, Vocabulary relations, std::size_t dim, Rng &rng) {
  M2RModel model{std::move(features), std::move(relations), {}, {}};
  model.words = EmbeddingMatrix(model.features.size(), dim);
  model.relation_embeddings = EmbeddingMatrix(model.relations.size(), dim);
  init_uniform(model.words, rng);
  init_uniform(model.relation_embeddings, rng);
  return model;
}

// SGD over the weakly labeled mentions. Each epoch visits every mention once
// in shuffled order, pairing it with one uniformly drawn wrong relationship.
inline M2RModel train_m2r(std::span<const MentionRecord> data, Vocabulary features, Vocabulary relations,
                          const M2RTrainOptions &opts, const EpochCallback &on_epoch = {}) {
  opts.model.validate();
  if (data.empty()) throw std::invalid_argument("train_m2r: empty dataset");
  if (relations.size() < 2) throw std::invalid_argument("train_m2r: need at least two relationships");
  if (opts.cross_mention_rate < 0.0 || opts.cross_mention_rate > 1.0)
    throw std::invalid_argument("train_m2r: cross_mention_rate must lie in [0, 1]");

  std::vector<std::uint32_t> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto id = relations.find(data[i].label);
    if (!id) throw std::invalid_argument("train_m2r: label '" + data[i].label + "' not in relationship vocabulary");
    labels[i] = *id;
    for (auto f : data[i].features.indices())
      if (f >= features.size()) throw std::invalid_argument("train_m2r: feature id out of range");
  }

  Rng rng(opts.model.seed);
  M2RModel model = init_m2r(std::move(features), std::move(relations), opts.model.dim, rng);
  const std::size_t n_r = model.num_relations();
  std::bernoulli_distribution cross(opts.mode == ConstraintMode::kCrossMention ? opts.cross_mention_rate : 0.0);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= opts.model.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats{epoch, 0.0, 0};
    double total = 0.0;
    for (auto i : order) {
      const auto neg_r = sample_other(rng, n_r, labels[i]);
      const auto j = cross(rng) ? uniform_index(rng, data.size()) : i;
      const double loss = sgd_step_m2r(model, data[i].features, labels[i], data[j].features, neg_r,
                                       opts.model.learning_rate, opts.model.margin);
      if (!std::isfinite(loss))
        throw TrainingError("train_m2r: non-finite loss at epoch " + std::to_string(epoch) + ", mention '" +
                            data[i].id + "'");
      total += loss;
      if (loss > 0.0) ++stats.violations;
    }
    stats.mean_hinge = total / static_cast<double>(data.size());
    if (on_epoch) on_epoch(stats);
  }
  return model;
}

inline M2RModel train_m2r(std::span<const MentionRecord> data, Vocabulary features, const M2RTrainOptions &opts,
                          const EpochCallback &on_epoch = {}) {
  return train_m2r(data, std::move(features), make_relation_vocabulary(data), opts, on_epoch);
}

inline void save_m2r_model(const std::string &path, const M2RModel &m) {
  const NamedMatrix blocks[] = {{"features", m.features, m.words},
                                {"relationships", m.relations, m.relation_embeddings}};
  save_model(path, blocks);
}

inline M2RModel load_m2r_model(const std::string &path) {
  auto blocks = load_model(path);
  const auto &f = find_block(blocks, "features", path);
  const auto &r = find_block(blocks, "relationships", path);
  if (f.values.dim() != r.values.dim())
    throw DimensionMismatch(path + ": feature dim " + std::to_string(f.values.dim()) + " != relationship dim " +
                            std::to_string(r.values.dim()));
  return {f.symbols, r.symbols, f.values, r.values};
}

}  // namespace relex
