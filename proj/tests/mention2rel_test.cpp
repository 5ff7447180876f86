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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "relex/mention2rel.hpp"

namespace relex {
namespace {

M2RModel zero_model(std::size_t n_features, std::size_t n_relations, std::size_t dim) {
  std::vector<std::string> f, r;
  for (std::size_t i = 0; i < n_features; ++i) f.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < n_relations; ++i) r.push_back("r" + std::to_string(i));
  return {Vocabulary(f), Vocabulary(r), EmbeddingMatrix(n_features, dim), EmbeddingMatrix(n_relations, dim)};
}

M2RModel random_model(std::size_t n_features, std::size_t n_relations, std::size_t dim, Rng &rng) {
  auto m = zero_model(n_features, n_relations, dim);
  init_uniform(m.words, rng);
  init_uniform(m.relation_embeddings, rng);
  return m;
}

SparseVector random_mention(std::size_t n_features, Rng &rng) {
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0, n = 1 + uniform_index(rng, 4); i < n; ++i)
    ids.push_back(static_cast<std::uint32_t>(uniform_index(rng, n_features)));
  return SparseVector(ids);
}

TEST(ScoreM2R, Examples) {
  auto m = zero_model(2, 2, 2);
  m.words.row(0)[0] = 1.0;
  m.relation_embeddings.row(0)[0] = 1.0;
  m.relation_embeddings.row(1)[1] = 1.0;
  EXPECT_EQ(score_m2r(m, SparseVector{}, 0), 0.0);
  EXPECT_EQ(score_m2r(m, SparseVector({0}), 0), 1.0);
  EXPECT_EQ(score_m2r(m, SparseVector({0}), 1), 0.0);
  EXPECT_THROW(score_m2r(m, SparseVector({0}), 2), std::invalid_argument);
}

TEST(ScoreM2R, BilinearInFeatureRow) {
  Rng rng(1);
  auto m = random_model(5, 3, 4, rng);
  const SparseVector phi({2});
  const double before = score_m2r(m, phi, 1);
  for (double &x : m.words.row(2)) x *= 2.0;
  EXPECT_NEAR(score_m2r(m, phi, 1), 2.0 * before, 1e-12);
}

TEST(ScoreM2R, MatchesOracle) {
  Rng rng(2);
  auto m = random_model(20, 6, 5, rng);
  for (int i = 0; i < 100; ++i) {
    const auto phi = random_mention(20, rng);
    const auto r = static_cast<std::uint32_t>(uniform_index(rng, 6));
    EXPECT_NEAR(score_m2r(m, phi, r), oracle::m2r_score(m, phi, r), 1e-12);
    EXPECT_NEAR(score_all_m2r(m, phi)[r], oracle::m2r_score(m, phi, r), 1e-12);
  }
}

TEST(SgdStepM2R, MarginSatisfiedLeavesModelUnchanged) {
  // S(pos) = 2, S(neg) = 0.
  auto m = zero_model(2, 2, 2);
  m.words.row(0)[0] = 1.0;
  m.words.row(1)[0] = 1.0;
  m.relation_embeddings.row(0)[0] = 1.0;
  m.relation_embeddings.row(1)[1] = 1.0;
  const auto before = m;
  const SparseVector phi({0, 1});
  EXPECT_EQ(sgd_step_m2r(m, phi, 0, phi, 1, 0.5), 0.0);
  EXPECT_EQ(m.words, before.words);
  EXPECT_EQ(m.relation_embeddings, before.relation_embeddings);
}

TEST(SgdStepM2R, ZeroScoresGiveUnitLossAndUpdate) {
  auto m = zero_model(2, 2, 2);
  m.words.row(0)[0] = 0.5;
  m.relation_embeddings.row(0)[1] = 0.5;
  m.relation_embeddings.row(1)[1] = -0.5;
  // f(m) . r0 = 0 and f(m) . r1 = 0.
  const auto before = m;
  EXPECT_DOUBLE_EQ(sgd_step_m2r(m, SparseVector({0}), 0, SparseVector({0}), 1, 0.1), 1.0);
  EXPECT_NE(m.words, before.words);
  EXPECT_NE(m.relation_embeddings, before.relation_embeddings);
  EXPECT_GT(score_m2r(m, SparseVector({0}), 0) - score_m2r(m, SparseVector({0}), 1), 0.0);
}

TEST(SgdStepM2R, KinkTakesZeroBranch) {
  auto m = zero_model(1, 2, 1);
  m.words.row(0)[0] = 1.0;
  m.relation_embeddings.row(0)[0] = 1.0;  // S(pos) = 1, S(neg) = 0: loss exactly 0
  const auto before = m;
  EXPECT_EQ(sgd_step_m2r(m, SparseVector({0}), 0, SparseVector({0}), 1, 0.1), 0.0);
  EXPECT_EQ(m.relation_embeddings, before.relation_embeddings);
}

TEST(SgdStepM2R, SameRelationRejected) {
  auto m = zero_model(2, 2, 2);
  EXPECT_THROW(sgd_step_m2r(m, SparseVector({0}), 1, SparseVector({0}), 1, 0.1), std::invalid_argument);
}

// Analytic hinge gradient against central differences of an independently
// computed loss, at random points away from the kink.
TEST(SgdStepM2R, GradientMatchesFiniteDifferences) {
  Rng rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    auto m = zero_model(12, 5, 5);
    for (double &x : m.words.data()) x = u(rng);
    for (double &x : m.relation_embeddings.data()) x = u(rng);
    const auto pm = random_mention(12, rng);
    const auto nm = uniform_index(rng, 2) ? pm : random_mention(12, rng);
    const auto pr = static_cast<std::uint32_t>(uniform_index(rng, 5));
    const auto nr = sample_other(rng, 5, pr);
    auto loss = [&] {
      return std::max(0.0, 1.0 - oracle::m2r_score(m, pm, pr) + oracle::m2r_score(m, nm, nr));
    };
    const double raw = 1.0 - oracle::m2r_score(m, pm, pr) + oracle::m2r_score(m, nm, nr);
    if (std::abs(raw) <= 1e-3) continue;
    ++checked;
    const auto g = m2r_hinge_gradient(m, pm, pr, nm, nr, 1.0);
    EXPECT_NEAR(g.loss, loss(), 1e-12);
    // Every entry of every row, touched or not.
    for (Table table : {Table::kFeatures, Table::kRelations}) {
      auto &mat = table == Table::kFeatures ? m.words : m.relation_embeddings;
      for (std::uint32_t row = 0; row < mat.rows(); ++row) {
        const Vector *analytic = nullptr;
        for (const auto &rg : g.grads)
          if (rg.table == table && rg.row == row) analytic = &rg.grad;
        for (std::size_t d = 0; d < 5; ++d) {
          const double fd = oracle::central_difference(mat.row(row)[d], loss);
          const double a = analytic ? (*analytic)[d] : 0.0;
          EXPECT_LT(oracle::relative_error(a, fd), 1e-4) << "row " << row << " dim " << d;
        }
      }
    }
  }
}

TEST(SgdStepM2R, NormInvariantUnderManySteps) {
  Rng rng(8);
  auto m = random_model(30, 6, 5, rng);
  for (int i = 0; i < 5000; ++i) {
    const auto pr = static_cast<std::uint32_t>(uniform_index(rng, 6));
    sgd_step_m2r(m, random_mention(30, rng), pr, random_mention(30, rng), sample_other(rng, 6, pr), 0.5);
  }
  EXPECT_LE(m.words.max_row_norm(), 1.0 + 1e-9);
  EXPECT_LE(m.relation_embeddings.max_row_norm(), 1.0 + 1e-9);
}

TEST(PredictRelation, Examples) {
  auto m = zero_model(1, 3, 2);
  m.words.row(0)[0] = 1.0;
  m.relation_embeddings.row(1)[0] = 0.5;
  m.relation_embeddings.row(2)[0] = -0.5;
  EXPECT_EQ(predict_relation(m, SparseVector({0})), 1u);
  EXPECT_EQ(predict_relation(zero_model(1, 3, 2), SparseVector({0})), 0u);
}

TEST(PredictRelation, LowestIdAmongMaximizers) {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = zero_model(6, 5, 2);
    // Coarse values so that ties are common.
    for (double &x : m.words.data()) x = static_cast<double>(uniform_index(rng, 3)) - 1.0;
    for (double &x : m.relation_embeddings.data()) x = static_cast<double>(uniform_index(rng, 3)) - 1.0;
    const auto phi = random_mention(6, rng);
    double best = -1e300;
    std::uint32_t expect = 0;
    for (std::uint32_t r = 0; r < 5; ++r) {
      const double s = oracle::m2r_score(m, phi, r);
      if (s > best) best = s, expect = r;
    }
    EXPECT_EQ(predict_relation(m, phi), expect);
  }
}

TEST(RelationVocabulary, NaAppendedLast) {
  std::vector<MentionRecord> data{{"1", "a", "b", "r2", {}}, {"2", "a", "b", "NA", {}}, {"3", "a", "b", "r1", {}}};
  auto v = make_relation_vocabulary(data);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"r1", "r2", "NA"}));
}

std::vector<MentionRecord> separable_toy() {
  // Label i has indicative feature i; features 4..7 are shared noise.
  std::vector<MentionRecord> data;
  const char *labels[] = {"r0", "r1", "r2", "NA"};
  Rng rng(6);
  for (int i = 0; i < 80; ++i) {
    const auto l = static_cast<std::uint32_t>(i % 4);
    std::vector<std::uint32_t> f{l, static_cast<std::uint32_t>(4 + uniform_index(rng, 4))};
    data.push_back({std::to_string(i), "h", "t", labels[l], SparseVector(f)});
  }
  return data;
}

Vocabulary feature_vocab(std::size_t n) {
  Vocabulary v;
  for (std::size_t i = 0; i < n; ++i) v.add("f" + std::to_string(i));
  return v;
}

TEST(TrainM2R, SeparableToyReachesFullAccuracy) {
  const auto data = separable_toy();
  for (auto mode : {ConstraintMode::kPerMention, ConstraintMode::kCrossMention}) {
    M2RTrainOptions opts;
    opts.mode = mode;
    opts.model.dim = 10;
    opts.model.epochs = 50;
    opts.model.learning_rate = 0.01;
    std::vector<EpochStats> log;
    const auto model = train_m2r(data, feature_vocab(8), opts, [&](const EpochStats &s) { log.push_back(s); });
    ASSERT_EQ(log.size(), 50u);
    for (const auto &s : log) EXPECT_TRUE(std::isfinite(s.mean_hinge));
    EXPECT_LT(log.back().mean_hinge, log.front().mean_hinge);
    for (const auto &m : data) {
      // Exhaustive scoring over every relationship.
      std::uint32_t best = 0;
      for (std::uint32_t r = 1; r < model.num_relations(); ++r)
        if (oracle::m2r_score(model, m.features, r) > oracle::m2r_score(model, m.features, best)) best = r;
      EXPECT_EQ(model.relations.token_of(best), m.label);
      EXPECT_EQ(predict_relation(model, m.features), best);
    }
    EXPECT_LE(model.words.max_row_norm(), 1.0 + 1e-9);
    EXPECT_LE(model.relation_embeddings.max_row_norm(), 1.0 + 1e-9);
  }
}

TEST(TrainM2R, DeterministicForSeed) {
  const auto data = separable_toy();
  M2RTrainOptions opts;
  opts.model.dim = 4;
  opts.model.epochs = 3;
  const auto a = train_m2r(data, feature_vocab(8), opts);
  const auto b = train_m2r(data, feature_vocab(8), opts);
  EXPECT_EQ(a.words, b.words);
  EXPECT_EQ(a.relation_embeddings, b.relation_embeddings);
}

TEST(TrainM2R, Errors) {
  M2RTrainOptions opts;
  EXPECT_THROW(train_m2r({}, feature_vocab(2), opts), std::invalid_argument);
  std::vector<MentionRecord> bad{{"1", "a", "b", "r", SparseVector({5})}};
  EXPECT_THROW(train_m2r(bad, feature_vocab(2), opts), std::invalid_argument);
  std::vector<MentionRecord> unknown{{"1", "a", "b", "zz", SparseVector({0})}};
  EXPECT_THROW(train_m2r(unknown, feature_vocab(2), Vocabulary(std::vector<std::string>{"r", "NA"}), opts),
               std::invalid_argument);
  opts.cross_mention_rate = 2.0;
  EXPECT_THROW(train_m2r(separable_toy(), feature_vocab(8), opts), std::invalid_argument);
}

TEST(TrainM2R, DefaultLearningRate) { EXPECT_EQ(M2RTrainOptions{}.model.learning_rate, 0.001); }

}  // namespace
}  // namespace relex
