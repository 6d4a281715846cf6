#ifndef RIPE_TESTS_TEST_SUPPORT_HPP
#define RIPE_TESTS_TEST_SUPPORT_HPP

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "ripe/ripe.hpp"

namespace ripe::testing {

/// Dataset whose raw values are the modalities themselves.
inline Dataset dataset_from_modalities(const std::vector<std::vector<Modality>>& rows, std::vector<double> y) {
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  Matrix<double> raw(rows.size(), d);
  Matrix<Modality> disc(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) {
      raw(i, k) = rows[i][k];
      disc(i, k) = rows[i][k];
    }
  Dataset data{std::move(raw), std::move(disc), std::move(y), default_feature_names(d)};
  data.validate();
  return data;
}

/// A random small problem on a modality grid of side m.
struct Instance {
  std::size_t m = 5;
  Dataset data;
  Discretizer disc;
  std::vector<Rule> rules;
};

inline Rule random_rule(Rng& rng, std::size_t d, std::size_t m) {
  Rule r;
  const std::size_t cp = 1 + rng.below(d);
  std::vector<std::size_t> feats(d);
  for (std::size_t k = 0; k < d; ++k) feats[k] = k;
  for (std::size_t k = 0; k < cp; ++k) std::swap(feats[k], feats[k + rng.below(d - k)]);
  for (std::size_t k = 0; k < cp; ++k) {
    auto a = static_cast<Modality>(rng.below(m));
    auto b = static_cast<Modality>(rng.below(m));
    if (a > b) std::swap(a, b);
    r.conditions[feats[k]] = Interval{a, b};
  }
  return r;
}

inline Instance random_instance(Rng& rng, std::size_t max_n = 200, std::size_t max_d = 3, std::size_t max_r = 5) {
  Instance inst;
  const std::size_t n = 2 + rng.below(max_n - 1);
  const std::size_t d = 1 + rng.below(max_d);
  const std::size_t r = rng.below(max_r + 1);
  std::vector<std::vector<Modality>> rows(n, std::vector<Modality>(d));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) rows[i][k] = static_cast<Modality>(rng.below(inst.m));
    // Quarter-integer targets keep some sums exact and others not.
    y[i] = std::round(rng.normal() * 40.0) / 4.0 + 0.1 * rows[i][0];
  }
  inst.data = dataset_from_modalities(rows, y);
  std::vector<FeatureBins> bins(d);
  for (auto& b : bins) {
    b.distinct_values = true;
    for (std::size_t v = 0; v < inst.m; ++v) b.values.push_back(static_cast<double>(v));
    b.edges.assign(b.values.begin(), b.values.end() - 1);
  }
  inst.disc = Discretizer(inst.m, bins);
  for (std::size_t i = 0; i < r; ++i) inst.rules.push_back(random_rule(rng, d, inst.m));
  return inst;
}

inline std::vector<ScoredRule> score_all(const std::vector<Rule>& rules, const Dataset& data) {
  std::vector<ScoredRule> out;
  for (const auto& r : rules) out.push_back(score(r, data));
  return out;
}

/// Explicit geometry on the finite modality grid {0..m-1}^d: points are
/// encoded as base-m integers.
class GridGeometry {
 public:
  GridGeometry(std::size_t m, std::size_t d) : m_(m), d_(d) {
    total_ = 1;
    for (std::size_t k = 0; k < d; ++k) total_ *= m;
  }

  std::vector<Modality> point(std::size_t code) const {
    std::vector<Modality> p(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      p[k] = static_cast<Modality>(code % m_);
      code /= m_;
    }
    return p;
  }
  std::size_t code(std::span<const Modality> p) const {
    std::size_t c = 0;
    for (std::size_t k = d_; k-- > 0;) c = c * m_ + p[k];
    return c;
  }

  /// The hyperrectangle as an explicit point set.
  std::set<std::size_t> box(const Rule& r) const {
    std::set<std::size_t> s;
    for (std::size_t c = 0; c < total_; ++c) {
      const auto p = point(c);
      bool in = true;
      for (const auto& [k, iv] : r.conditions) in = in && p[k] >= iv.low && p[k] <= iv.high;
      if (in) s.insert(c);
    }
    return s;
  }
  std::set<std::size_t> everything() const {
    std::set<std::size_t> s;
    for (std::size_t c = 0; c < total_; ++c) s.insert(c);
    return s;
  }

  /// Cell containing x: intersection of the boxes holding x minus the union
  /// of the boxes not holding it.
  std::set<std::size_t> cell_of(const std::vector<Rule>& rules, std::span<const Modality> x) const {
    const std::size_t xc = code(x);
    std::set<std::size_t> inter = everything();
    std::set<std::size_t> uni;
    for (const auto& r : rules) {
      const auto b = box(r);
      if (b.contains(xc)) {
        std::set<std::size_t> tmp;
        std::set_intersection(inter.begin(), inter.end(), b.begin(), b.end(), std::inserter(tmp, tmp.begin()));
        inter = std::move(tmp);
      } else {
        uni.insert(b.begin(), b.end());
      }
    }
    std::set<std::size_t> cell;
    std::set_difference(inter.begin(), inter.end(), uni.begin(), uni.end(), std::inserter(cell, cell.begin()));
    return cell;
  }

 private:
  std::size_t m_, d_, total_;
};

/// Cell mean of x's geometric cell over the training rows, summing in row
/// order; 0 for an empty cell.
inline double geometric_cell_mean(const GridGeometry& g, const std::vector<Rule>& rules, const Dataset& data,
                                  std::span<const Modality> x) {
  const auto cell = g.cell_of(rules, x);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < data.n(); ++j)
    if (cell.contains(g.code(data.disc.row(j)))) {
      sum += data.y[j];
      ++count;
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline double geometric_set_risk(const GridGeometry& g, const std::vector<Rule>& rules, const Dataset& data) {
  std::vector<double> pred(data.n());
  for (std::size_t j = 0; j < data.n(); ++j) pred[j] = geometric_cell_mean(g, rules, data, data.disc.row(j));
  return empirical_risk(pred, data.y);
}

}  // namespace ripe::testing

#endif  // RIPE_TESTS_TEST_SUPPORT_HPP
