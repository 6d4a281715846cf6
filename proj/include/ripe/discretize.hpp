#ifndef RIPE_DISCRETIZE_HPP
#define RIPE_DISCRETIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ripe/core.hpp"

namespace ripe {

/// Cut points of one feature. A value x falls in class
/// #{edges < x}, so class k covers (edges[k-1], edges[k]].
struct FeatureBins {
  std::vector<double> edges;
  // Set when the feature had at most m_n distinct values; `values` then holds
  // them in ascending order and class k is exactly values[k].
  bool distinct_values = false;
  std::vector<double> values;

  std::size_t num_classes() const noexcept { return edges.size() + 1; }

  friend bool operator==(const FeatureBins&, const FeatureBins&) = default;
};

/// Quantile discretizer mapping each raw feature value to one of at most m_n
/// ordered modalities.
class Discretizer {
 public:
  Discretizer() = default;
  Discretizer(std::size_t modalities, std::vector<FeatureBins> bins)
      : modalities_(modalities), bins_(std::move(bins)) {
    if (modalities_ < 2) throw ParameterError("m_n must be at least 2");
    for (const auto& b : bins_) {
      if (b.edges.size() + 1 > modalities_) throw InputError("feature has more classes than m_n");
      if (!std::is_sorted(b.edges.begin(), b.edges.end()) ||
          std::adjacent_find(b.edges.begin(), b.edges.end()) != b.edges.end())
        throw InputError("discretizer edges must be strictly ascending");
    }
  }

  /// Empirical-quantile fit. Features with more than m_n distinct values are
  /// cut at the order statistics of rank ceil(j*n/m_n) for j = 1..m_n-1;
  /// duplicate cuts are merged and a cut equal to the maximum is dropped so
  /// every class is populated on the training data. Features with at most
  /// m_n distinct values get one class per value.
  static Discretizer fit(const Matrix<double>& raw, std::size_t modalities) {
    if (modalities < 2) throw ParameterError("m_n must be at least 2");
    if (raw.empty()) throw InputError("cannot fit a discretizer on an empty matrix");
    const std::size_t n = raw.rows();
    std::vector<FeatureBins> bins(raw.cols());
    for (std::size_t k = 0; k < raw.cols(); ++k) {
      auto col = raw.column(k);
      for (double v : col)
        if (!std::isfinite(v)) throw InputError("non-finite value in feature " + std::to_string(k));
      std::sort(col.begin(), col.end());
      std::vector<double> distinct(col);
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

      FeatureBins& b = bins[k];
      if (distinct.size() <= modalities) {
        b.distinct_values = true;
        b.values = distinct;
        b.edges.assign(distinct.begin(), distinct.end() - 1);
        continue;
      }
      for (std::size_t j = 1; j < modalities; ++j) {
        // ceil(j*n/m) - 1, in integer arithmetic.
        const std::size_t rank = (j * n + modalities - 1) / modalities;
        const double q = col[rank == 0 ? 0 : rank - 1];
        if (q >= col.back()) break;
        if (b.edges.empty() || q > b.edges.back()) b.edges.push_back(q);
      }
    }
    return Discretizer(modalities, std::move(bins));
  }

  std::size_t modalities() const noexcept { return modalities_; }
  std::size_t dimension() const noexcept { return bins_.size(); }
  const std::vector<FeatureBins>& bins() const noexcept { return bins_; }
  std::size_t num_classes(std::size_t feature) const { return bins_.at(feature).num_classes(); }

  Modality transform_value(std::size_t feature, double value) const {
    if (std::isnan(value)) throw InputError("NaN value in feature " + std::to_string(feature));
    const auto& e = bins_[feature].edges;
    return static_cast<Modality>(std::lower_bound(e.begin(), e.end(), value) - e.begin());
  }

  std::vector<Modality> transform(std::span<const double> raw_row) const {
    if (raw_row.size() != bins_.size())
      throw InputError("row has " + std::to_string(raw_row.size()) + " values, expected " +
                       std::to_string(bins_.size()));
    std::vector<Modality> out(raw_row.size());
    for (std::size_t k = 0; k < raw_row.size(); ++k) out[k] = transform_value(k, raw_row[k]);
    return out;
  }

  Matrix<Modality> transform(const Matrix<double>& raw) const {
    if (raw.cols() != bins_.size()) throw InputError("matrix width does not match discretizer");
    Matrix<Modality> out(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < raw.rows(); ++i)
      for (std::size_t k = 0; k < raw.cols(); ++k) out(i, k) = transform_value(k, raw(i, k));
    return out;
  }

  /// Raw-value bounds of a modality interval as (lower, upper, lower_open).
  /// Unbounded ends are +-infinity.
  struct RawBounds {
    double lower;
    double upper;
    bool lower_open;
  };
  RawBounds raw_bounds(std::size_t feature, Interval iv) const {
    const auto& b = bins_.at(feature);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (b.distinct_values) {
      const double lo = iv.low == 0 ? -inf : b.values[iv.low];
      const double hi = iv.high + 1 >= b.values.size() ? inf : b.values[iv.high];
      return {lo, hi, false};
    }
    const double lo = iv.low == 0 ? -inf : b.edges[iv.low - 1];
    const double hi = iv.high >= b.edges.size() ? inf : b.edges[iv.high];
    return {lo, hi, true};
  }

  friend bool operator==(const Discretizer&, const Discretizer&) = default;

 private:
  std::size_t modalities_ = 0;
  std::vector<FeatureBins> bins_;
};

/// Builds a Dataset by discretizing `raw` with `disc`.
inline Dataset make_dataset(Matrix<double> raw, std::vector<double> y, const Discretizer& disc,
                            std::vector<std::string> names = {}) {
  if (names.empty()) names = default_feature_names(raw.cols());
  Dataset data{std::move(raw), {}, std::move(y), std::move(names)};
  data.disc = disc.transform(data.raw);
  data.validate();
  return data;
}

/// Raw-value rendering of a rule, e.g. "age in (30.5, 41]".
inline std::string describe_raw(const Rule& rule, const Discretizer& disc,
                                std::span<const std::string> names) {
  if (rule.conditions.empty()) return "(always)";
  auto fmt = [](double v) {
    if (std::isinf(v)) return std::string(v < 0 ? "-inf" : "inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  std::string out;
  for (const auto& [k, iv] : rule.conditions) {
    if (!out.empty()) out += " & ";
    const std::string name = k < names.size() ? names[k] : "X" + std::to_string(k);
    const auto rb = disc.raw_bounds(k, iv);
    const auto& b = disc.bins()[k];
    if (b.distinct_values && iv.low == iv.high) {
      out += name + " = " + fmt(b.values[iv.low]);
      continue;
    }
    const bool lower_inf = std::isinf(rb.lower);
    out += name + " in " + ((rb.lower_open || lower_inf) ? "(" : "[") + fmt(rb.lower) + ", " +
           fmt(rb.upper) + (std::isinf(rb.upper) ? ")" : "]");
  }
  return out;
}

}  // namespace ripe

#endif  // RIPE_DISCRETIZE_HPP
