#include <gtest/gtest.h>

#include <numeric>

#include "ripe/discretize.hpp"
#include "ripe/experiment.hpp"

namespace ripe {
namespace {

Matrix<double> column(std::vector<double> v) {
  const auto n = v.size();
  return Matrix<double>(n, 1, std::move(v));
}

std::vector<Modality> classes(const Discretizer& d, const Matrix<double>& m) {
  return d.transform(m).column(0);
}

TEST(Discretizer, UniformColumnSplitsEvenly) {
  const auto m = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto d = Discretizer::fit(m, 5);
  EXPECT_EQ(classes(d, m), (std::vector<Modality>{0, 0, 1, 1, 2, 2, 3, 3, 4, 4}));
  EXPECT_EQ(d.num_classes(0), 5u);
}

TEST(Discretizer, FewDistinctValuesGetOneClassEach) {
  const auto m = column({7, -1, 0, 7, -1, 0, 0});
  const auto d = Discretizer::fit(m, 5);
  EXPECT_TRUE(d.bins()[0].distinct_values);
  EXPECT_EQ(classes(d, m), (std::vector<Modality>{2, 0, 1, 2, 0, 1, 1}));
}

TEST(Discretizer, ConstantColumnIsOneClass) {
  const auto m = column({3, 3, 3, 3});
  const auto d = Discretizer::fit(m, 5);
  EXPECT_EQ(d.num_classes(0), 1u);
  EXPECT_EQ(classes(d, m), (std::vector<Modality>{0, 0, 0, 0}));
}

TEST(Discretizer, TransformWithKnownEdges) {
  FeatureBins b;
  b.edges = {2.0, 4.0, 6.0, 8.0};
  const Discretizer d(5, {b});
  EXPECT_EQ(d.transform_value(0, 5.0), 2u);
  EXPECT_EQ(d.transform_value(0, -1e300), 0u);
  EXPECT_EQ(d.transform_value(0, 1e300), 4u);
  EXPECT_EQ(d.transform_value(0, 2.0), 0u);
  EXPECT_EQ(d.transform_value(0, 2.0000001), 1u);
}

TEST(Discretizer, Errors) {
  EXPECT_THROW(Discretizer::fit(column({1, 2, 3}), 1), ParameterError);
  EXPECT_THROW(Discretizer::fit(Matrix<double>(), 5), InputError);
  const auto d = Discretizer::fit(Matrix<double>(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6}), 5);
  const std::vector<double> row{1.0};
  EXPECT_THROW(d.transform(row), InputError);
}

TEST(Discretizer, SkewedColumnMergesDuplicateCuts) {
  std::vector<double> v(100, 0.0);
  for (int i = 90; i < 100; ++i) v[i] = i;
  const auto d = Discretizer::fit(column(v), 5);
  EXPECT_LT(d.num_classes(0), 5u);
  const auto c = classes(d, column(v));
  // Every class is populated on the training data.
  std::vector<int> seen(d.num_classes(0), 0);
  for (auto m : c) seen[m]++;
  for (int s : seen) EXPECT_GT(s, 0);
}

TEST(Discretizer, MonotoneAndBalanced) {
  Rng rng(3);
  std::vector<double> v(2000);
  for (auto& x : v) x = rng.normal();
  const auto m = column(v);
  const auto d = Discretizer::fit(m, 5);
  const auto c = classes(d, m);
  std::vector<double> share(5, 0.0);
  for (auto k : c) share[k] += 100.0 / 2000.0;
  for (double s : share) EXPECT_NEAR(s, 20.0, 2.0);

  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LE(c[idx[i - 1]], c[idx[i]]);
}

TEST(Discretizer, RefitOnModalitiesIsIdempotent) {
  Rng rng(5);
  Matrix<double> m(500, 3);
  for (std::size_t i = 0; i < 500; ++i)
    for (std::size_t k = 0; k < 3; ++k) m(i, k) = rng.uniform(-4, 9);
  const auto d = Discretizer::fit(m, 5);
  const auto disc = d.transform(m);
  Matrix<double> as_raw(500, 3);
  for (std::size_t i = 0; i < 500; ++i)
    for (std::size_t k = 0; k < 3; ++k) as_raw(i, k) = disc(i, k);
  const auto d2 = Discretizer::fit(as_raw, 5);
  EXPECT_EQ(d2.transform(as_raw), disc);
}

TEST(Discretizer, RawBoundsRenderIntervals) {
  const auto m = column({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto d = Discretizer::fit(m, 5);
  const auto rb = d.raw_bounds(0, Interval{1, 2});
  EXPECT_EQ(rb.lower, 1.0);
  EXPECT_EQ(rb.upper, 5.0);
  EXPECT_TRUE(rb.lower_open);
  const std::vector<std::string> names{"age"};
  EXPECT_EQ(describe_raw(Rule({{0, Interval{1, 2}}}), d, names), "age in (1, 5]");
  EXPECT_EQ(describe_raw(Rule({{0, Interval{3, 4}}}), d, names), "age in (5, inf)");
}

}  // namespace
}  // namespace ripe
