#include <gtest/gtest.h>

#include <set>

#include "ripe/experiment.hpp"
#include "ripe/generate.hpp"
#include "test_support.hpp"

namespace ripe {
namespace {

using testing::dataset_from_modalities;

Dataset circle_dataset(std::size_t n = 5000) {
  const auto raw = gen_circle(n, 42);
  return make_dataset(raw.x, raw.y, Discretizer::fit(raw.x, 5), raw.names);
}

const Dataset& circle() {
  static const Dataset data = circle_dataset();
  return data;
}

TEST(CalcCp1, TriangularCandidateCount) {
  std::vector<std::vector<Modality>> rows;
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({static_cast<Modality>(i % 5)});
    y.push_back(i % 5);
  }
  const auto data = dataset_from_modalities(rows, y);
  MiningTrace trace;
  calc_cp1(data, {}, &trace);
  EXPECT_EQ(trace.cp1_candidates, 15u);
}

TEST(CalcCp1, CandidateCountMatchesEffectiveClasses) {
  const auto& data = circle();
  MiningTrace trace;
  calc_cp1(data, {}, &trace);
  std::size_t expected = 0;
  for (std::size_t k = 0; k < data.d(); ++k) {
    const auto q = effective_classes(data, k);
    expected += q * (q + 1) / 2;
  }
  EXPECT_EQ(trace.cp1_candidates, expected);
}

TEST(CalcCp1, PureNoiseRarelyPasses) {
  Rng rng(42);
  const std::size_t n = 2000, d = 5;
  Matrix<double> x(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x(i, k) = rng.normal();
    y[i] = rng.normal();
  }
  const auto data = make_dataset(x, y, Discretizer::fit(x, 5));
  MiningTrace trace;
  const auto rules = calc_cp1(data, {}, &trace);
  EXPECT_LT(static_cast<double>(rules.size()), 0.2 * static_cast<double>(trace.cp1_candidates));
}

TEST(CalcCp1, CircleUsesOnlyInformativeFeatures) {
  const auto rules = calc_cp1(circle(), {});
  ASSERT_FALSE(rules.empty());
  for (const auto& r : rules) {
    ASSERT_EQ(complexity(r.rule), 1u);
    EXPECT_LT(r.rule.conditions.begin()->first, 2u);
  }
  // Output ordered by (feature, b_min, b_max).
  for (std::size_t i = 1; i < rules.size(); ++i) EXPECT_LT(rules[i - 1].rule, rules[i].rule);
}

ScoredRule scored(const Rule& r, const Dataset& data) { return score(r, data); }

TEST(Intersect, SharedFeatureIsRejected) {
  const auto data = dataset_from_modalities({{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {1, 2, 3, 4});
  const auto a = scored(Rule({{0, Interval{0, 1}}}), data);
  const auto b = scored(Rule({{0, Interval{1, 2}}}), data);
  EXPECT_FALSE(intersect(a, b).has_value());
}

TEST(Intersect, NestedActivationsAreRejected) {
  const auto data = dataset_from_modalities({{0, 1}, {0, 2}, {1, 4}, {2, 3}, {3, 0}}, {1, 2, 3, 4, 5});
  const auto a = scored(Rule({{0, Interval{0, 0}}}), data);
  const auto b = scored(Rule({{1, Interval{0, 3}}}), data);
  EXPECT_FALSE(intersect(a, b).has_value());
  // Disjoint on data.
  const auto c = scored(Rule({{1, Interval{4, 4}}}), data);
  EXPECT_FALSE(intersect(a, c).has_value());
}

TEST(Intersect, EightRowExample) {
  const auto data = dataset_from_modalities({{0, 2}, {1, 3}, {0, 0}, {1, 1}, {3, 2}, {4, 4}, {2, 0}, {3, 1}},
                                            {1, 2, 3, 4, 5, 6, 7, 8});
  const auto a = scored(Rule({{0, Interval{0, 1}}}), data);
  const auto b = scored(Rule({{1, Interval{2, 4}}}), data);
  const auto r = intersect(a, b);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first, Rule({{0, Interval{0, 1}}, {1, Interval{2, 4}}}));
  EXPECT_EQ(complexity(r->first), 2u);
  EXPECT_EQ(r->second.count(), 2u);
  EXPECT_EQ(r->second, activation_vector(r->first, data.disc));
}

TEST(CalcCpc, EmptyBeamGivesNothing) {
  const auto& data = circle();
  EXPECT_TRUE(calc_cpc(data, {}, 2, {}).empty());
  const auto cp1 = calc_cp1(data, {});
  EXPECT_TRUE(calc_cpc(data, cp1, 3, {}).empty());
}

TEST(CalcCpc, BeamWidthOneTestsOnePair) {
  const auto& data = circle();
  MiningParams params;
  params.beam_width = 1;
  const auto cp1 = calc_cp1(data, params);
  MiningTrace trace;
  const auto cp2 = calc_cpc(data, cp1, 2, params, &trace);
  ASSERT_EQ(trace.pairs_tested.size(), 1u);
  EXPECT_LE(trace.pairs_tested[0], 1u);
  EXPECT_LE(cp2.size(), 1u);
}

TEST(CalcCpc, CircleFindsCrossFeatureRules) {
  const auto& data = circle();
  const auto cp1 = calc_cp1(data, {});
  const auto cp2 = calc_cpc(data, cp1, 2, {});
  ASSERT_FALSE(cp2.empty());
  bool central = false;
  std::set<Rule> unique;
  for (const auto& r : cp2) {
    EXPECT_EQ(complexity(r.rule), 2u);
    EXPECT_TRUE(r.rule.conditions.contains(0) && r.rule.conditions.contains(1));
    EXPECT_TRUE(unique.insert(r.rule).second);
    const auto& i0 = r.rule.conditions.at(0);
    const auto& i1 = r.rule.conditions.at(1);
    central = central || (i0.low >= 1 && i0.high <= 3 && i1.low >= 1 && i1.high <= 3);
  }
  EXPECT_TRUE(central);
}

TEST(Mine, SingleFeatureOnlyComplexityOne) {
  Rng rng(1);
  Matrix<double> x(400, 1);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < 400; ++i) {
    x(i, 0) = rng.uniform();
    y[i] = x(i, 0) > 0.7 ? 3.0 : 0.0;
  }
  const auto data = make_dataset(x, y, Discretizer::fit(x, 5));
  const auto rules = mine(data, {});
  ASSERT_FALSE(rules.empty());
  for (const auto& r : rules) EXPECT_EQ(complexity(r.rule), 1u);
}

TEST(Mine, NothingSuitableGivesEmpty) {
  const auto data = dataset_from_modalities({{0, 1}, {1, 0}}, {1.0, 2.0});
  EXPECT_TRUE(mine(data, {}).empty());
}

TEST(Mine, CircleRulesAreSuitableSortedAndAtMostPairwise) {
  const auto& data = circle();
  const MiningParams params;
  MiningTrace trace;
  const auto rules = mine(data, params, &trace);
  ASSERT_FALSE(rules.empty());
  std::map<Rule, const ScoredRule*> by_rule;
  for (const auto& r : rules) by_rule[r.rule] = &r;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    EXPECT_LE(complexity(r.rule), 2u);
    EXPECT_TRUE(is_suitable(r.rule, data, params.modalities, params.spec));
    EXPECT_EQ(r.stats.activation_bits, activation_vector(r.rule, data.disc));
    if (i > 0) {
      EXPECT_TRUE(risk_order(rules[i - 1], r));
    }
    if (complexity(r.rule) == 2) {
      // Bits are the AND of two complexity-1 parents present in the pool.
      auto it = r.rule.conditions.begin();
      const Rule p1({*it}), p2({*std::next(it)});
      ASSERT_TRUE(by_rule.contains(p1) && by_rule.contains(p2));
      EXPECT_EQ(r.stats.activation_bits, by_rule[p1]->stats.activation_bits & by_rule[p2]->stats.activation_bits);
    }
  }
}

TEST(Mine, DeterministicAcrossThreadCounts) {
  const auto& data = circle();
  MiningParams one, four;
  four.threads = 4;
  const auto a = mine(data, one);
  const auto b = mine(data, four);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rule, b[i].rule);
    EXPECT_EQ(a[i].stats.single_rule_risk, b[i].stats.single_rule_risk);
  }
}

TEST(Mine, HigherComplexityOnSparseInteraction) {
  // y depends on a three-way conjunction, so complexity-3 rules can appear.
  Rng rng(8);
  Matrix<double> x(3000, 3);
  std::vector<double> y(3000);
  for (std::size_t i = 0; i < 3000; ++i) {
    for (std::size_t k = 0; k < 3; ++k) x(i, k) = rng.uniform();
    y[i] = (x(i, 0) < 0.4 && x(i, 1) < 0.4 && x(i, 2) < 0.4 ? 5.0 : 0.0) + 0.1 * rng.normal();
  }
  const auto data = make_dataset(x, y, Discretizer::fit(x, 5));
  MiningTrace trace;
  const auto rules = mine(data, {}, &trace);
  std::size_t max_cp = 0;
  for (const auto& r : rules) max_cp = std::max(max_cp, complexity(r.rule));
  EXPECT_EQ(max_cp, 3u);
  for (const auto& r : rules) EXPECT_TRUE(is_suitable(r.rule, data, 5, {}));
}

TEST(MiningParams, Validation) {
  MiningParams p;
  p.modalities = 1;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.beam_width = 0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.spec.kind = ZKind::variance;
  EXPECT_THROW(p.validate(), ParameterError);
}

}  // namespace
}  // namespace ripe
