#ifndef RIPE_GENERATE_HPP
#define RIPE_GENERATE_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "ripe/core.hpp"
#include "ripe/parallel.hpp"
#include "ripe/significance.hpp"

namespace ripe {

struct MiningParams {
  std::size_t modalities = 5;
  SignificanceSpec spec{};
  std::size_t beam_width = 300;
  // 0 means "number of features".
  std::size_t max_complexity = 0;
  unsigned threads = 1;

  void validate() const {
    if (modalities < 2) throw ParameterError("m_n must be at least 2");
    if (beam_width < 1) throw ParameterError("beam width M must be at least 1");
    spec.validate_for_mining();
  }
};

/// Counters collected while mining; useful for tests and logging.
struct MiningTrace {
  std::size_t cp1_candidates = 0;
  std::vector<std::size_t> pairs_tested;  // per complexity level c >= 2
  std::vector<std::size_t> suitable_per_complexity;
};

/// Strict total order used everywhere rules are ranked: lower single-rule
/// risk first, then higher coverage, lower complexity, and finally the
/// condition map itself.
inline bool risk_order(const ScoredRule& a, const ScoredRule& b) {
  if (a.stats.single_rule_risk != b.stats.single_rule_risk)
    return a.stats.single_rule_risk < b.stats.single_rule_risk;
  if (a.stats.n_activated != b.stats.n_activated) return a.stats.n_activated > b.stats.n_activated;
  if (complexity(a.rule) != complexity(b.rule)) return complexity(a.rule) < complexity(b.rule);
  return a.rule < b.rule;
}

inline void sort_by_risk(std::vector<ScoredRule>& rules) {
  std::stable_sort(rules.begin(), rules.end(), risk_order);
}

/// Fills every statistic of `rule` given its activation bits.
inline ScoredRule score_rule(Rule rule, BitVector bits, const Dataset& data, const SampleSummary& s,
                             const SignificanceSpec& spec) {
  ScoredRule out{std::move(rule), {}};
  out.stats.n_activated = bits.count();
  out.stats.coverage = static_cast<double>(out.stats.n_activated) / static_cast<double>(data.n());
  out.stats.mu = conditional_mean(bits, data.y);
  out.stats.z_value = z_threshold(spec, out.stats.n_activated, s);
  out.stats.activation_bits = std::move(bits);
  return out;
}

/// Full statistics of an arbitrary rule on `data`, suitable or not.
inline ScoredRule score(const Rule& rule, const Dataset& data, const SignificanceSpec& spec = {}) {
  auto scored = score_rule(rule, activation_vector(rule, data.disc), data, SampleSummary::of(data.y), spec);
  scored.stats.single_rule_risk = single_rule_risk(scored.stats.activation_bits, data.y);
  return scored;
}

/// Scores the candidate and keeps it only when suitable; the single-rule risk
/// is computed for kept rules only.
inline std::optional<ScoredRule> keep_if_suitable(Rule rule, BitVector bits, const Dataset& data,
                                                  const SampleSummary& s, const MiningParams& params) {
  const std::size_t count = bits.count();
  if (count == 0) return std::nullopt;
  const double mu = conditional_mean(bits, data.y);
  if (!is_suitable(count, mu, s, params.modalities, params.spec)) return std::nullopt;
  auto scored = score_rule(std::move(rule), std::move(bits), data, s, params.spec);
  scored.stats.single_rule_risk = single_rule_risk(scored.stats.activation_bits, data.y);
  return scored;
}

/// Number of classes actually used by feature k on the sample.
inline std::size_t effective_classes(const Dataset& data, std::size_t k) {
  Modality top = 0;
  for (std::size_t j = 0; j < data.n(); ++j) top = std::max(top, data.disc(j, k));
  return static_cast<std::size_t>(top) + 1;
}

/// All suitable single-feature rules, ordered by (feature, b_min, b_max).
inline std::vector<ScoredRule> calc_cp1(const Dataset& data, const MiningParams& params,
                                        MiningTrace* trace = nullptr) {
  params.validate();
  data.validate();
  const auto summary = SampleSummary::of(data.y);
  const std::size_t d = data.d();
  std::vector<std::vector<ScoredRule>> per_feature(d);
  std::vector<std::size_t> tested(d, 0);

  parallel_for(d, params.threads, [&](std::size_t k) {
    const std::size_t q = effective_classes(data, k);
    std::vector<BitVector> class_bits(q, BitVector(data.n()));
    for (std::size_t j = 0; j < data.n(); ++j) class_bits[data.disc(j, k)].set(j);
    for (std::size_t lo = 0; lo < q; ++lo) {
      BitVector bits(data.n());
      for (std::size_t hi = lo; hi < q; ++hi) {
        bits |= class_bits[hi];
        ++tested[k];
        // The full range constrains nothing; it is the empty rule.
        if (lo == 0 && hi + 1 == q) continue;
        Rule rule({{k, Interval{static_cast<Modality>(lo), static_cast<Modality>(hi)}}});
        if (auto kept = keep_if_suitable(std::move(rule), bits, data, summary, params))
          per_feature[k].push_back(std::move(*kept));
      }
    }
  });

  std::vector<ScoredRule> out;
  for (std::size_t k = 0; k < d; ++k) {
    for (auto& r : per_feature[k]) out.push_back(std::move(r));
    if (trace) trace->cp1_candidates += tested[k];
  }
  if (trace) trace->suitable_per_complexity.assign(1, out.size());
  return out;
}

/// Suitable intersection of two scored rules, or nothing when the rules share
/// a feature or their intersection is empty or equal to one of them on the
/// sample.
inline std::optional<std::pair<Rule, BitVector>> intersect(const ScoredRule& a, const ScoredRule& b) {
  for (const auto& [k, iv] : a.rule.conditions)
    if (b.rule.conditions.contains(k)) return std::nullopt;
  BitVector bits = a.stats.activation_bits & b.stats.activation_bits;
  const std::size_t count = bits.count();
  if (count == 0 || count == a.stats.n_activated || count == b.stats.n_activated) return std::nullopt;
  Rule merged(a.rule.conditions);
  merged.conditions.insert(b.rule.conditions.begin(), b.rule.conditions.end());
  return std::make_pair(std::move(merged), std::move(bits));
}

/// Suitable rules of complexity c from the M best complexity-1 rules crossed
/// with the M best complexity-(c-1) rules.
inline std::vector<ScoredRule> calc_cpc(const Dataset& data, const std::vector<ScoredRule>& rules_so_far,
                                        std::size_t c, const MiningParams& params,
                                        MiningTrace* trace = nullptr) {
  params.validate();
  if (c < 2) throw ParameterError("calc_cpc needs complexity c >= 2");
  std::vector<const ScoredRule*> ranked;
  ranked.reserve(rules_so_far.size());
  for (const auto& r : rules_so_far) ranked.push_back(&r);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredRule* a, const ScoredRule* b) { return risk_order(*a, *b); });

  auto beam = [&](std::size_t cp) {
    std::vector<const ScoredRule*> out;
    for (const auto* r : ranked) {
      if (out.size() >= params.beam_width) break;
      if (complexity(r->rule) == cp) out.push_back(r);
    }
    return out;
  };
  const auto first = beam(1);
  const auto previous = beam(c - 1);
  if (trace) trace->pairs_tested.push_back(first.size() * previous.size());
  if (first.empty() || previous.empty()) return {};

  const auto summary = SampleSummary::of(data.y);
  const std::size_t pairs = first.size() * previous.size();
  std::vector<std::optional<ScoredRule>> slots(pairs);
  parallel_for(pairs, params.threads, [&](std::size_t p) {
    const auto& a = *first[p / previous.size()];
    const auto& b = *previous[p % previous.size()];
    auto candidate = intersect(a, b);
    if (!candidate) return;
    slots[p] = keep_if_suitable(std::move(candidate->first), std::move(candidate->second), data, summary, params);
  });

  std::vector<ScoredRule> out;
  std::set<Rule> seen;
  for (auto& slot : slots) {
    if (!slot || complexity(slot->rule) != c) continue;
    if (!seen.insert(slot->rule).second) continue;
    out.push_back(std::move(*slot));
  }
  return out;
}

/// Every suitable rule up to the complexity cap, sorted by risk_order.
inline std::vector<ScoredRule> mine(const Dataset& data, const MiningParams& params,
                                    MiningTrace* trace = nullptr) {
  params.validate();
  data.validate();
  auto rules = calc_cp1(data, params, trace);
  const std::size_t cap = params.max_complexity == 0 ? data.d() : std::min(params.max_complexity, data.d());
  for (std::size_t c = 2; c <= cap && !rules.empty(); ++c) {
    auto level = calc_cpc(data, rules, c, params, trace);
    if (trace) trace->suitable_per_complexity.push_back(level.size());
    if (level.empty()) break;
    for (auto& r : level) rules.push_back(std::move(r));
  }
  sort_by_risk(rules);
  return rules;
}

}  // namespace ripe

#endif  // RIPE_GENERATE_HPP
