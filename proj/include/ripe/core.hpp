#ifndef RIPE_CORE_HPP
#define RIPE_CORE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ripe/bit_vector.hpp"

namespace ripe {

/// Malformed data or mismatched shapes.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Hyperparameter outside its admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An internal consistency check failed.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

using Modality = std::uint32_t;

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T value = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw InputError("matrix data size does not match shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  std::vector<T> column(std::size_t j) const {
    std::vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Closed interval of modality indices.
struct Interval {
  Modality low = 0;
  Modality high = 0;

  bool contains(Modality m) const noexcept { return low <= m && m <= high; }
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

/// Hyperrectangle over the discretized feature space. Features absent from
/// `conditions` are unconstrained.
struct Rule {
  std::map<std::size_t, Interval> conditions;
  std::string label;

  Rule() = default;
  explicit Rule(std::map<std::size_t, Interval> c, std::string l = {})
      : conditions(std::move(c)), label(std::move(l)) {}

  bool contains(std::span<const Modality> disc_row) const noexcept {
    for (const auto& [k, iv] : conditions)
      if (!iv.contains(disc_row[k])) return false;
    return true;
  }

  // Structural identity ignores the display label.
  friend bool operator==(const Rule& a, const Rule& b) { return a.conditions == b.conditions; }
  friend auto operator<=>(const Rule& a, const Rule& b) { return a.conditions <=> b.conditions; }
};

/// Activation statistics of a rule on a training sample.
struct RuleStats {
  BitVector activation_bits;
  std::size_t n_activated = 0;
  double coverage = 0.0;
  double mu = 0.0;
  double z_value = 0.0;
  double single_rule_risk = 0.0;
};

/// A rule together with its statistics on the sample it was mined from.
struct ScoredRule {
  Rule rule;
  RuleStats stats;
};

/// Row-aligned raw features, their modalities and the target.
struct Dataset {
  Matrix<double> raw;
  Matrix<Modality> disc;
  std::vector<double> y;
  std::vector<std::string> feature_names;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t d() const noexcept { return disc.cols(); }

  void validate() const {
    if (y.size() < 2) throw InputError("dataset needs at least two rows");
    if (disc.rows() != y.size() || raw.rows() != y.size())
      throw InputError("dataset matrices and target are not row-aligned");
    if (raw.cols() != disc.cols()) throw InputError("raw and discretized widths differ");
    if (!feature_names.empty() && feature_names.size() != disc.cols())
      throw InputError("feature name count does not match width");
  }
};

inline std::vector<std::string> default_feature_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t k = 0; k < d; ++k) names.push_back("X" + std::to_string(k));
  return names;
}

/// Bit j set iff row j of `disc` lies inside `rule`.
inline BitVector activation_vector(const Rule& rule, const Matrix<Modality>& disc) {
  for (const auto& [k, iv] : rule.conditions) {
    if (k >= disc.cols())
      throw InputError("rule constrains feature " + std::to_string(k) + " but data has " +
                       std::to_string(disc.cols()) + " features");
  }
  BitVector bits(disc.rows());
  for (std::size_t j = 0; j < disc.rows(); ++j)
    if (rule.contains(disc.row(j))) bits.set(j);
  return bits;
}

/// Mean of y over the set bits; 0 for an empty selection.
inline double conditional_mean(const BitVector& bits, std::span<const double> y) {
  if (bits.size() != y.size()) throw InputError("activation vector and target lengths differ");
  double sum = 0.0;
  std::size_t count = 0;
  bits.for_each_set([&](std::size_t j) {
    sum += y[j];
    ++count;
  });
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline std::size_t complexity(const Rule& rule) noexcept { return rule.conditions.size(); }

/// Mean squared error of `predictions` against `y`.
inline double empirical_risk(std::span<const double> predictions, std::span<const double> y) {
  if (predictions.size() != y.size()) throw InputError("prediction and target lengths differ");
  if (y.empty()) throw InputError("empirical risk of an empty sample");
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = predictions[i] - y[i];
    sse += r * r;
  }
  return sse / static_cast<double>(y.size());
}

inline double mean(std::span<const double> y) {
  double sum = 0.0;
  for (double v : y) sum += v;
  return y.empty() ? 0.0 : sum / static_cast<double>(y.size());
}

/// Cell means for a labelled partition of the rows. `cell_of[j]` is the cell
/// index of row j, in [0, num_cells). Sums accumulate in row order so every
/// route that builds the same partition produces bit-identical means.
struct PartitionMeans {
  std::vector<double> mean;
  std::vector<std::size_t> count;
};

inline PartitionMeans partition_means(std::span<const std::uint32_t> cell_of, std::size_t num_cells,
                                      std::span<const double> y) {
  PartitionMeans out{std::vector<double>(num_cells, 0.0), std::vector<std::size_t>(num_cells, 0)};
  for (std::size_t j = 0; j < y.size(); ++j) {
    out.mean[cell_of[j]] += y[j];
    ++out.count[cell_of[j]];
  }
  for (std::size_t c = 0; c < num_cells; ++c)
    out.mean[c] = out.count[c] == 0 ? 0.0 : out.mean[c] / static_cast<double>(out.count[c]);
  return out;
}

/// Empirical risk of the predictor that answers each row with its cell mean.
inline double partition_risk(std::span<const std::uint32_t> cell_of, std::size_t num_cells,
                             std::span<const double> y) {
  const auto cells = partition_means(cell_of, num_cells, y);
  std::vector<double> pred(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) pred[j] = cells.mean[cell_of[j]];
  return empirical_risk(pred, y);
}

/// Risk of the two-cell predictor built from one activation set and its
/// complement (the complement being the no-rule-satisfied cell).
inline double single_rule_risk(const BitVector& bits, std::span<const double> y) {
  if (bits.size() != y.size()) throw InputError("activation vector and target lengths differ");
  std::vector<std::uint32_t> cell_of(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) cell_of[j] = bits.test(j) ? 1u : 0u;
  return partition_risk(cell_of, 2, y);
}

inline double single_rule_risk(const Rule& rule, const Dataset& data) {
  return single_rule_risk(activation_vector(rule, data.disc), data.y);
}

/// Human-readable modality form, e.g. "X0 in [1, 3] & X4 = 2".
inline std::string describe_modalities(const Rule& rule, std::span<const std::string> names) {
  if (rule.conditions.empty()) return "(always)";
  std::string out;
  for (const auto& [k, iv] : rule.conditions) {
    if (!out.empty()) out += " & ";
    const std::string name = k < names.size() ? names[k] : "X" + std::to_string(k);
    if (iv.low == iv.high)
      out += name + " = " + std::to_string(iv.low);
    else
      out += name + " in [" + std::to_string(iv.low) + ", " + std::to_string(iv.high) + "]";
  }
  return out;
}

}  // namespace ripe

#endif  // RIPE_CORE_HPP
