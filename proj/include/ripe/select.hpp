#ifndef RIPE_SELECT_HPP
#define RIPE_SELECT_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ripe/core.hpp"
#include "ripe/parallel.hpp"

namespace ripe {

/// Which of the R rules an observation activates. Bit i corresponds to the
/// i-th rule of the list the signature was computed against.
struct CellSignature {
  std::vector<bool> bits;

  std::size_t size() const noexcept { return bits.size(); }
  bool no_rule() const noexcept { return std::none_of(bits.begin(), bits.end(), [](bool b) { return b; }); }

  std::string to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) s[i] = '1';
    return s;
  }
  static CellSignature from_string(const std::string& s) {
    CellSignature sig;
    sig.bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw InputError("cell signature must be a string of 0/1, got '" + s + "'");
      sig.bits.push_back(c == '1');
    }
    return sig;
  }

  friend bool operator==(const CellSignature&, const CellSignature&) = default;
  friend auto operator<=>(const CellSignature& a, const CellSignature& b) { return a.bits <=> b.bits; }
};

struct CellStats {
  std::size_t count = 0;
  double mean = 0.0;
  friend bool operator==(const CellStats&, const CellStats&) = default;
};

using CellTable = std::map<CellSignature, CellStats>;

/// Signatures of every observation: the transpose of the rule-major
/// activation matrix.
inline std::vector<CellSignature> signatures(std::span<const BitVector* const> rules, std::size_t n) {
  std::vector<CellSignature> out(n, CellSignature{std::vector<bool>(rules.size(), false)});
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i]->size() != n) throw InputError("activation vector length differs from sample size");
    rules[i]->for_each_set([&](std::size_t j) { out[j].bits[i] = true; });
  }
  return out;
}

/// Dense cell labelling: rows with equal signatures share a label, labels
/// are numbered by first appearance. Runs in O(n R) without hashing.
struct CellLabels {
  std::vector<std::uint32_t> cell_of;
  std::size_t num_cells = 1;
};

inline CellLabels label_cells(std::span<const BitVector* const> rules, std::size_t n) {
  CellLabels labels{std::vector<std::uint32_t>(n, 0), n == 0 ? 0u : 1u};
  std::vector<std::int64_t> remap;
  for (const BitVector* bits : rules) {
    if (bits->size() != n) throw InputError("activation vector length differs from sample size");
    remap.assign(2 * labels.num_cells, -1);
    std::uint32_t next = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t key = 2 * labels.cell_of[j] + (bits->test(j) ? 1 : 0);
      if (remap[key] < 0) remap[key] = next++;
      labels.cell_of[j] = static_cast<std::uint32_t>(remap[key]);
    }
    labels.num_cells = next;
  }
  return labels;
}

inline CellTable build_cell_table(std::span<const BitVector* const> rules, std::span<const double> y) {
  const auto labels = label_cells(rules, y.size());
  const auto means = partition_means(labels.cell_of, labels.num_cells, y);
  const auto sigs = signatures(rules, y.size());
  CellTable table;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto c = labels.cell_of[j];
    table.try_emplace(sigs[j], CellStats{means.count[c], means.mean[c]});
  }
  return table;
}

/// Empirical risk of the partition predictor spanned by `rules`; an empty
/// list gives the constant-mean predictor.
inline double set_risk(std::span<const BitVector* const> rules, std::span<const double> y) {
  const auto labels = label_cells(rules, y.size());
  return partition_risk(labels.cell_of, labels.num_cells, y);
}

inline double set_risk(std::span<const ScoredRule> rules, std::span<const double> y) {
  std::vector<const BitVector*> bits;
  bits.reserve(rules.size());
  for (const auto& r : rules) bits.push_back(&r.stats.activation_bits);
  return set_risk(bits, y);
}

struct SelectionTrace {
  std::vector<double> risk_per_step;  // risk of S after each step, including the initial one
  std::size_t evaluations = 0;
};

/// Greedy subset selection over a risk-sorted pool. Returns indices into
/// `pool` in ascending order. At each step the candidates are S, S + r and
/// every S + r - s; strictly lower risk wins, ties go to the smaller set
/// and then to the earlier candidate.
inline std::vector<std::size_t> select(std::span<const ScoredRule> pool, std::span<const double> y,
                                       unsigned threads = 1, SelectionTrace* trace = nullptr) {
  if (pool.empty()) return {};
  std::vector<std::size_t> current{0};
  auto risk_of = [&](const std::vector<std::size_t>& subset) {
    std::vector<const BitVector*> bits;
    bits.reserve(subset.size());
    for (auto i : subset) bits.push_back(&pool[i].stats.activation_bits);
    return set_risk(bits, y);
  };
  double current_risk = risk_of(current);
  if (trace) {
    trace->risk_per_step.push_back(current_risk);
    trace->evaluations += 1;
  }

  for (std::size_t next = 1; next < pool.size(); ++next) {
    std::vector<std::vector<std::size_t>> candidates;
    candidates.reserve(current.size() + 2);
    candidates.push_back(current);
    auto grown = current;
    grown.push_back(next);
    candidates.push_back(grown);
    for (std::size_t drop = 0; drop < current.size(); ++drop) {
      auto swapped = grown;
      swapped.erase(swapped.begin() + static_cast<std::ptrdiff_t>(drop));
      candidates.push_back(std::move(swapped));
    }

    std::vector<double> risks(candidates.size());
    risks[0] = current_risk;
    parallel_for(candidates.size() - 1, threads, [&](std::size_t c) { risks[c + 1] = risk_of(candidates[c + 1]); });

    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      if (risks[c] < risks[best] || (risks[c] == risks[best] && candidates[c].size() < candidates[best].size()))
        best = c;
    }
    current = std::move(candidates[best]);
    current_risk = risks[best];
    if (trace) {
      trace->risk_per_step.push_back(current_risk);
      trace->evaluations += candidates.size() - 1;
    }
  }
  return current;
}

}  // namespace ripe

#endif  // RIPE_SELECT_HPP
