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
#include "relex/evaluation.hpp"

namespace relex {
namespace {

ScoredExtraction x(std::string h, std::string r, std::string t, double s) {
  return {std::move(h), std::move(r), std::move(t), s, 1};
}

GoldSet gold_of(std::initializer_list<Fact> facts) {
  GoldSet g;
  for (const auto &f : facts) g.insert(f);
  return g;
}

// [correct, wrong, correct] against two gold facts.
std::vector<PrPoint> hand_curve() {
  const std::vector<ScoredExtraction> xs = {x("c", "r", "d", 1.0), x("a", "r", "b", 3.0), x("a", "r", "z", 2.0)};
  return precision_recall_curve(xs, gold_of({{"a", "r", "b"}, {"c", "r", "d"}}));
}

TEST(GoldSet, RejectsNaAndDuplicates) {
  GoldSet g;
  EXPECT_TRUE(g.insert({"a", "r", "b"}));
  EXPECT_FALSE(g.insert({"a", "r", "b"}));
  EXPECT_THROW(g.insert({"a", std::string(kNoRelation), "b"}), std::invalid_argument);
  EXPECT_EQ(g.size(), 1u);
}

TEST(PrCurve, HandExample) {
  const auto c = hand_curve();
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(c[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(c[1].recall, 0.5);
  EXPECT_DOUBLE_EQ(c[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(c[2].recall, 1.0);
  EXPECT_NEAR(c[2].precision, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c[1].tail, "z");
  EXPECT_FALSE(c[1].correct);
  EXPECT_EQ(c[2].rank, 3u);
}

TEST(PrCurve, PerfectList) {
  const std::vector<ScoredExtraction> xs = {x("a", "r", "b", 1.0), x("c", "r", "d", 0.5)};
  const auto c = precision_recall_curve(xs, gold_of({{"a", "r", "b"}, {"c", "r", "d"}}));
  EXPECT_DOUBLE_EQ(c.back().recall, 1.0);
  EXPECT_DOUBLE_EQ(c.back().precision, 1.0);
  EXPECT_DOUBLE_EQ(area_under_pr(c, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(area_under_pr(c, 0.1), 0.0);  // first point already at recall 0.5
}

TEST(PrCurve, RepeatedFactCountsOnce) {
  const std::vector<ScoredExtraction> xs = {x("a", "r", "b", 2.0), x("a", "r", "b", 1.0)};
  const auto c = precision_recall_curve(xs, gold_of({{"a", "r", "b"}, {"c", "r", "d"}}));
  EXPECT_TRUE(c[0].correct);
  EXPECT_FALSE(c[1].correct);
  EXPECT_DOUBLE_EQ(c[1].recall, 0.5);
  EXPECT_DOUBLE_EQ(c[1].precision, 0.5);
}

TEST(PrCurve, EmptyGoldThrowsAndEmptyListIsEmpty) {
  EXPECT_THROW(precision_recall_curve({}, GoldSet{}), std::invalid_argument);
  EXPECT_TRUE(precision_recall_curve({}, gold_of({{"a", "r", "b"}})).empty());
}

TEST(PrCurve, MatchesOracleOnRandomLists) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredExtraction> xs;
    std::set<Fact> facts;
    GoldSet gold;
    const auto n = 1 + uniform_index(rng, 40);
    for (std::size_t i = 0; i < n; ++i) {
      auto e = x("e" + std::to_string(uniform_index(rng, 10)), "r" + std::to_string(uniform_index(rng, 3)),
                 "e" + std::to_string(uniform_index(rng, 10)), static_cast<double>(uniform_index(rng, 5)));
      if (uniform_index(rng, 2)) {
        facts.insert({e.head, e.relation, e.tail});
      }
      xs.push_back(std::move(e));
    }
    facts.insert({"gold", "only", "fact"});
    for (const auto &f : facts) gold.insert(f);
    const auto curve = precision_recall_curve(xs, gold);
    const auto expect = oracle::pr_curve(xs, facts);
    ASSERT_EQ(curve.size(), expect.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      EXPECT_DOUBLE_EQ(curve[i].recall, expect[i].recall);
      EXPECT_DOUBLE_EQ(curve[i].precision, expect[i].precision);
      EXPECT_EQ(curve[i].correct, expect[i].correct);
      const double hits = curve[i].precision * static_cast<double>(i + 1);
      EXPECT_NEAR(hits, std::round(hits), 1e-9);
      if (i > 0) {
        EXPECT_GE(curve[i].recall, curve[i - 1].recall);
        EXPECT_GE(curve[i].correct_so_far, curve[i - 1].correct_so_far);
      }
      EXPECT_LE(curve[i].recall, 1.0);
    }
  }
}

TEST(AreaUnderPr, HandValues) {
  const auto c = hand_curve();
  // 0.5 * 1 + 0.5 * (0.5 + 2/3) / 2
  EXPECT_NEAR(area_under_pr(c, 1.0), 0.7916666666666666, 1e-12);
  // Cut at 0.75: 0.5 + 0.25 * (0.5 + 7/12) / 2, over 0.75.
  EXPECT_NEAR(area_under_pr(c, 0.75), (0.5 + 0.25 * (0.5 + 7.0 / 12.0) / 2.0) / 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(area_under_pr(c, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(area_under_pr(c, 0.1), 0.0);
  EXPECT_THROW(area_under_pr(c, 0.0), std::invalid_argument);
  EXPECT_THROW(area_under_pr(c, 1.5), std::invalid_argument);
  EXPECT_THROW(area_under_pr({}, 1.0), std::invalid_argument);
}

std::vector<PrPoint> points(std::initializer_list<std::pair<double, double>> rp) {
  std::vector<PrPoint> out;
  for (auto [r, p] : rp) out.push_back({out.size() + 1, r, p});
  return out;
}

TEST(AreaUnderPr, ConstantPrecisionGivesThatPrecision) {
  for (double p : {1.0, 0.25, 0.0}) {
    const auto c = points({{0.05, p}, {0.1, p}, {0.3, p}, {0.6, p}, {0.6, p}, {1.0, p}});
    EXPECT_NEAR(area_under_pr(c, 1.0), p, 1e-12);
    EXPECT_NEAR(area_under_pr(c, 0.1), p, 1e-12);
    EXPECT_NEAR(area_under_pr(c, 0.45), p, 1e-12);
  }
}

// Piecewise-linear precision as a function of recall, integrated with a
// fine midpoint rule.
double numeric_area(const std::vector<PrPoint> &c, double ceiling) {
  if (c.front().recall > ceiling) return 0.0;
  auto at = [&](double r) {
    if (r <= c.front().recall) return c.front().precision;
    for (std::size_t i = 1; i < c.size(); ++i)
      if (r <= c[i].recall && c[i].recall > c[i - 1].recall) {
        const double f = (r - c[i - 1].recall) / (c[i].recall - c[i - 1].recall);
        return c[i - 1].precision + f * (c[i].precision - c[i - 1].precision);
      }
    return -1.0;  // beyond the last point
  };
  const int steps = 100000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double p = at((i + 0.5) * ceiling / steps);
    if (p < 0) break;
    sum += p;
  }
  return sum / steps;
}

TEST(AreaUnderPr, MatchesNumericIntegration) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PrPoint> c;
    double r = 0.0;
    while (r < 1.0) {
      r = std::min(1.0, r + 0.2 * u(rng));
      c.push_back({c.size() + 1, r, u(rng)});
    }
    for (double ceiling : {0.1, 0.37, 1.0}) {
      EXPECT_NEAR(area_under_pr(c, ceiling), numeric_area(c, ceiling), 1e-4) << trial << " " << ceiling;
    }
  }
}

TEST(PrecisionAtRecall, FirstPointReachingTarget) {
  const auto c = hand_curve();
  EXPECT_DOUBLE_EQ(precision_at_recall(c, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_recall(c, 0.2), 1.0);
  EXPECT_NEAR(precision_at_recall(c, 0.75), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(precision_at_recall(points({{0.2, 1.0}}), 0.5), 0.0);
}

TEST(Curve, FileHasHeaderRowsAndSummary) {
  const std::string path = ::testing::TempDir() + "/relex_curve.tsv";
  write_curve(path, hand_curve());
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "rank\trecall\tprecision\tcorrect\thead\trelation\ttail");
  EXPECT_EQ(lines[1], "1\t0.5\t1\t1\ta\tr\tb");
  EXPECT_EQ(lines[4].rfind("# auc@0.1=0\tauc@1.0=0.79166", 0), 0u) << lines[4];
  std::remove(path.c_str());
}

TEST(Gold, FileRoundTrip) {
  const std::string path = ::testing::TempDir() + "/relex_gold.tsv";
  const auto g = gold_of({{"a", "r", "b"}, {"c", "s", "d"}});
  write_gold(path, g);
  EXPECT_EQ(read_gold(path).facts(), g.facts());
  std::remove(path.c_str());
}

}  // namespace
}  // namespace relex
