#ifndef RIPE_SIGNIFICANCE_HPP
#define RIPE_SIGNIFICANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ripe/core.hpp"

namespace ripe {

enum class ZKind { hoeffding, bernstein, variance };

inline std::string to_string(ZKind kind) {
  switch (kind) {
    case ZKind::hoeffding: return "hoeffding";
    case ZKind::bernstein: return "bernstein";
    case ZKind::variance: return "variance";
  }
  return "?";
}

inline ZKind parse_z_kind(const std::string& s) {
  if (s == "hoeffding") return ZKind::hoeffding;
  if (s == "bernstein") return ZKind::bernstein;
  if (s == "variance") return ZKind::variance;
  throw ParameterError("unknown significance function '" + s + "'");
}

struct SignificanceSpec {
  ZKind kind = ZKind::bernstein;
  double alpha = 0.05;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  }
  /// The variance-based threshold needs the final partition, so it cannot
  /// screen rules while they are being mined.
  void validate_for_mining() const {
    validate();
    if (kind == ZKind::variance)
      throw ParameterError("the variance significance function is only available as a post-selection audit");
  }
};

/// Whole-sample quantities shared by every threshold evaluation.
struct SampleSummary {
  std::size_t n = 0;
  double max = 0.0;
  double min = 0.0;
  double sum_squares = 0.0;
  double mean = 0.0;

  static SampleSummary of(std::span<const double> y) {
    if (y.empty()) throw InputError("empty target vector");
    SampleSummary s;
    s.n = y.size();
    s.max = *std::max_element(y.begin(), y.end());
    s.min = *std::min_element(y.begin(), y.end());
    double sum = 0.0;
    for (double v : y) {
      sum += v;
      s.sum_squares += v * v;
    }
    s.mean = sum / static_cast<double>(y.size());
    return s;
  }
};

inline constexpr double kNeverSignificant = std::numeric_limits<double>::infinity();

/// (M - m) sqrt(ln(2/alpha)) / sqrt(2 n_r), with M, m the sample extremes.
inline double hoeffding_z(std::size_t n_r, const SampleSummary& s, double alpha) {
  if (n_r == 0) return kNeverSignificant;
  const double log_term = std::log(2.0 / alpha);
  return (s.max - s.min) * std::sqrt(log_term) / std::sqrt(2.0 * static_cast<double>(n_r));
}

inline double hoeffding_z(std::size_t n_r, std::span<const double> y, double alpha) {
  return hoeffding_z(n_r, SampleSummary::of(y), alpha);
}

/// Raw-moment form: M = max y, v = sum of y^2 over the whole sample.
inline double bernstein_z(std::size_t n_r, double max_y, double sum_squares, double alpha) {
  if (n_r == 0) return kNeverSignificant;
  const double l = std::log(2.0 / alpha);
  return (max_y * l + std::sqrt(max_y * max_y * l * l + 72.0 * sum_squares * l)) /
         (6.0 * static_cast<double>(n_r));
}

inline double bernstein_z(std::size_t n_r, const SampleSummary& s, double alpha) {
  return bernstein_z(n_r, s.max, s.sum_squares, alpha);
}

inline double bernstein_z(std::size_t n_r, std::span<const double> y, double alpha) {
  return bernstein_z(n_r, SampleSummary::of(y), alpha);
}

/// Threshold for a rule with n_r activations under a mining-time spec.
inline double z_threshold(const SignificanceSpec& spec, std::size_t n_r, const SampleSummary& s) {
  switch (spec.kind) {
    case ZKind::hoeffding: return hoeffding_z(n_r, s, spec.alpha);
    case ZKind::bernstein: return bernstein_z(n_r, s, spec.alpha);
    case ZKind::variance: break;
  }
  throw ParameterError("variance threshold requires the selected rule set");
}

/// Maximal admissible coverage ratio 1/ln(m_n).
inline double coverage_bound(std::size_t modalities) {
  return 1.0 / std::log(static_cast<double>(modalities));
}

/// Coverage and significance conditions on precomputed rule statistics.
inline bool is_suitable(std::size_t n_activated, double mu, const SampleSummary& s,
                        std::size_t modalities, const SignificanceSpec& spec) {
  if (n_activated == 0) return false;
  const double cov = static_cast<double>(n_activated) / static_cast<double>(s.n);
  if (cov > coverage_bound(modalities)) return false;
  return std::abs(mu - s.mean) >= z_threshold(spec, n_activated, s);
}

inline bool is_suitable(const Rule& rule, const Dataset& data, std::size_t modalities,
                        const SignificanceSpec& spec) {
  const auto bits = activation_vector(rule, data.disc);
  return is_suitable(bits.count(), conditional_mean(bits, data.y), SampleSummary::of(data.y),
                     modalities, spec);
}

namespace detail {

inline double sample_variance(std::span<const double> y, const BitVector* mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (!mask || mask->test(j)) {
      sum += y[j];
      ++n;
    }
  const double m = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (!mask || mask->test(j)) ss += (y[j] - m) * (y[j] - m);
  return ss / static_cast<double>(n - 1);
}

}  // namespace detail

/// Multiplicity factor of rule `index` within a selected set: the sample
/// size over the summed activation counts, times the largest number of rules
/// that meet a cell lying inside the rule. Cells are the non-empty
/// activation signatures observed on the sample.
inline double variance_beta(std::span<const BitVector> selected, std::size_t index) {
  if (index >= selected.size()) throw InputError("rule index out of range");
  const std::size_t n = selected[index].size();
  std::size_t total = 0;
  for (const auto& b : selected) total += b.count();
  std::size_t best = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!selected[index].test(j)) continue;
    std::size_t met = 0;
    for (const auto& b : selected) met += b.test(j) ? 1 : 0;
    best = std::max(best, met);
  }
  return total == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total) * static_cast<double>(best);
}

/// Variance-based threshold sqrt(beta * Var(Y) - Var(Y | r)); a negative
/// radicand is clamped to 0.
inline double variance_z(std::span<const BitVector> selected, std::size_t index, std::span<const double> y) {
  if (index >= selected.size()) throw InputError("rule index out of range");
  const auto& bits = selected[index];
  if (bits.size() != y.size()) throw InputError("activation vector and target lengths differ");
  if (bits.count() < 2) throw InputError("within-rule variance needs at least two activations");
  const double beta = variance_beta(selected, index);
  const double radicand = beta * detail::sample_variance(y, nullptr) - detail::sample_variance(y, &bits);
  return radicand > 0.0 ? std::sqrt(radicand) : 0.0;
}

}  // namespace ripe

#endif  // RIPE_SIGNIFICANCE_HPP
