#ifndef RIPE_PREDICT_HPP
#define RIPE_PREDICT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ripe/core.hpp"
#include "ripe/discretize.hpp"
#include "ripe/generate.hpp"
#include "ripe/select.hpp"
#include "ripe/significance.hpp"

namespace ripe {

/// A selected rule with its training statistics (activation bits dropped).
struct SelectedRule {
  Rule rule;
  std::size_t n_activated = 0;
  double coverage = 0.0;
  double mu = 0.0;
  double z_value = 0.0;
  double single_rule_risk = 0.0;
  // Training risk of the predictor built from this rule and all before it.
  double cumulative_risk = 0.0;

  friend bool operator==(const SelectedRule& a, const SelectedRule& b) {
    return a.rule == b.rule && a.rule.label == b.rule.label && a.n_activated == b.n_activated &&
           a.coverage == b.coverage && a.mu == b.mu && a.z_value == b.z_value &&
           a.single_rule_risk == b.single_rule_risk && a.cumulative_risk == b.cumulative_risk;
  }
};

struct TrainingMeta {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::string> feature_names;
  SampleSummary target;
  double constant_risk = 0.0;
  double training_risk = 0.0;
  // Two-cell risk of the no-rule-satisfied cell against the rest.
  double no_rule_risk = 0.0;
  std::size_t suitable_rules = 0;
};

struct RuleModel {
  Discretizer discretizer;
  std::vector<SelectedRule> rules;
  CellTable cells;
  double global_mean = 0.0;
  MiningParams params;
  // Prediction for signatures never seen in training: 0 by default, the
  // training mean when set.
  bool fallback_mean = false;
  TrainingMeta meta;

  CellSignature signature(std::span<const Modality> disc_row) const {
    CellSignature sig{std::vector<bool>(rules.size(), false)};
    for (std::size_t i = 0; i < rules.size(); ++i) sig.bits[i] = rules[i].rule.contains(disc_row);
    return sig;
  }

  double empty_cell_value() const noexcept { return fallback_mean ? global_mean : 0.0; }
};

struct FitOptions {
  MiningParams params{};
  bool fallback_mean = false;
};

/// Everything produced by a fit; the pool and dataset are kept for audits.
struct FitResult {
  RuleModel model;
  Dataset train;
  std::vector<ScoredRule> pool;
  std::vector<std::size_t> selected;  // indices into pool
  MiningTrace mining;
  SelectionTrace selection;
};

inline std::string rule_label(std::size_t index, const SelectedRule& r, double global_mean) {
  return "R " + std::to_string(index) + "(" + std::to_string(complexity(r.rule)) + ")" +
         (r.mu > global_mean ? "+" : "-");
}

/// Assembles a model from an ordered rule list scored on `data`. Labels are
/// assigned from list order.
inline RuleModel build_model(Discretizer disc, const Dataset& data, std::span<const ScoredRule> rules,
                             const FitOptions& options) {
  RuleModel model;
  model.discretizer = std::move(disc);
  model.params = options.params;
  model.fallback_mean = options.fallback_mean;
  model.meta.n = data.n();
  model.meta.d = data.d();
  model.meta.feature_names = data.feature_names.empty() ? default_feature_names(data.d()) : data.feature_names;
  model.meta.target = SampleSummary::of(data.y);
  model.global_mean = model.meta.target.mean;
  model.meta.constant_risk = set_risk(std::span<const BitVector* const>{}, data.y);

  std::vector<const BitVector*> bits;
  for (const auto& scored : rules) {
    if (scored.stats.activation_bits.size() != data.n())
      throw InputError("rule activation bits were not computed on this dataset");
    bits.push_back(&scored.stats.activation_bits);
    SelectedRule r;
    r.rule = scored.rule;
    r.n_activated = scored.stats.n_activated;
    r.coverage = scored.stats.coverage;
    r.mu = scored.stats.mu;
    r.z_value = scored.stats.z_value;
    r.single_rule_risk = scored.stats.single_rule_risk;
    r.cumulative_risk = set_risk(bits, data.y);
    r.rule.label = rule_label(model.rules.size(), r, model.global_mean);
    model.rules.push_back(std::move(r));
  }
  model.cells = build_cell_table(bits, data.y);
  model.meta.training_risk = set_risk(bits, data.y);
  BitVector no_rule(data.n(), true);
  for (const auto* b : bits) no_rule &= ~*b;
  model.meta.no_rule_risk = single_rule_risk(no_rule, data.y);
  return model;
}

inline FitResult fit_detailed(const Matrix<double>& raw, std::vector<double> y, std::vector<std::string> names,
                              const FitOptions& options) {
  options.params.validate();
  if (raw.rows() != y.size()) throw InputError("feature matrix and target have different row counts");
  if (y.size() < 2) throw InputError("need at least two training rows");
  if (names.empty()) names = default_feature_names(raw.cols());

  FitResult out;
  auto disc = Discretizer::fit(raw, options.params.modalities);
  out.train = make_dataset(raw, std::move(y), disc, std::move(names));
  out.pool = mine(out.train, options.params, &out.mining);
  out.selected = select(out.pool, out.train.y, options.params.threads, &out.selection);

  std::vector<ScoredRule> chosen;
  for (auto idx : out.selected) chosen.push_back(out.pool[idx]);
  out.model = build_model(std::move(disc), out.train, chosen, options);
  out.model.meta.suitable_rules = out.pool.size();
  return out;
}

inline RuleModel fit(const Matrix<double>& raw, std::vector<double> y, std::vector<std::string> names = {},
                     const FitOptions& options = {}) {
  return fit_detailed(raw, std::move(y), std::move(names), options).model;
}

inline double predict_discretized(const RuleModel& model, std::span<const Modality> disc_row) {
  const auto it = model.cells.find(model.signature(disc_row));
  return it == model.cells.end() ? model.empty_cell_value() : it->second.mean;
}

inline double predict(const RuleModel& model, std::span<const double> raw_row) {
  const auto disc_row = model.discretizer.transform(raw_row);
  return predict_discretized(model, disc_row);
}

inline std::vector<double> predict(const RuleModel& model, const Matrix<double>& raw) {
  std::vector<double> out(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) out[i] = predict(model, raw.row(i));
  return out;
}

/// Literal kernel form of the cell mean: sum_j y_j k(x, x_j) / sum_j k(x, x_j)
/// with k = prod_i [both in r_i or both outside r_i]. O(n R) per query; used
/// as the reference path. Returns `empty_value` when no training row shares
/// the query's cell.
inline double kernel_predict(std::span<const Rule> rules, const Matrix<Modality>& train_disc,
                             std::span<const double> y, std::span<const Modality> query, double empty_value = 0.0) {
  std::vector<bool> query_in(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) query_in[i] = rules[i].contains(query);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < train_disc.rows(); ++j) {
    int k = 1;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const bool train_in = rules[i].contains(train_disc.row(j));
      k *= (query_in[i] && train_in) || (!query_in[i] && !train_in) ? 1 : 0;
    }
    num += y[j] * k;
    den += k;
  }
  return den == 0.0 ? empty_value : num / den;
}

struct Explanation {
  std::string label;
  std::string conditions;  // raw-value form
  double mu = 0.0;
};

inline constexpr const char* kNoRuleSatisfied = "no rule satisfied";

/// Rules whose conditions the row satisfies, in model order. An empty
/// result is the no-rule-satisfied statement.
inline std::vector<Explanation> explain(const RuleModel& model, std::span<const double> raw_row) {
  const auto disc_row = model.discretizer.transform(raw_row);
  std::vector<Explanation> out;
  for (const auto& r : model.rules)
    if (r.rule.contains(disc_row))
      out.push_back({r.rule.label, describe_raw(r.rule, model.discretizer, model.meta.feature_names), r.mu});
  return out;
}

inline std::string explain_labels(const std::vector<Explanation>& ex) {
  if (ex.empty()) return kNoRuleSatisfied;
  std::string s;
  for (const auto& e : ex) {
    if (!s.empty()) s += "|";
    s += e.label;
  }
  return s;
}

struct SummaryRow {
  std::string label;
  std::string conditions;
  std::string raw_conditions;
  double coverage = 0.0;
  double prediction = 0.0;
  double z = 0.0;
  // Risk of the two-cell predictor of this row alone; increases down the
  // table because rules are listed in risk order.
  double mse = 0.0;
  // Risk of the predictor built from this row and every rule above it.
  double cumulative_mse = 0.0;
};

struct ModelSummary {
  std::vector<SummaryRow> rows;
  std::vector<std::pair<std::string, std::size_t>> occurrences;
};

/// Per-feature count of appearances in rule conditions, sorted by count
/// descending then feature index. Features that never appear are omitted.
inline std::vector<std::pair<std::string, std::size_t>> variable_occurrences(std::span<const Rule> rules,
                                                                             std::span<const std::string> names) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& r : rules)
    for (const auto& [k, iv] : r.conditions) ++counts[k];
  std::vector<std::pair<std::size_t, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& [k, c] : sorted) out.emplace_back(k < names.size() ? names[k] : "X" + std::to_string(k), c);
  return out;
}

inline ModelSummary summarize(const RuleModel& model) {
  ModelSummary s;
  const auto& names = model.meta.feature_names;
  for (const auto& r : model.rules)
    s.rows.push_back({r.rule.label, describe_modalities(r.rule, names), describe_raw(r.rule, model.discretizer, names),
                      r.coverage, r.mu, r.z_value, r.single_rule_risk, r.cumulative_risk});

  const CellSignature empty{std::vector<bool>(model.rules.size(), false)};
  const auto no_rule = model.cells.find(empty);
  if (model.rules.empty()) {
    s.rows.push_back({"R 0", "global mean", "global mean", 1.0, model.global_mean, 0.0, model.meta.training_risk,
                      model.meta.training_risk});
  } else if (no_rule != model.cells.end() && no_rule->second.count > 0) {
    const double z = model.params.spec.kind == ZKind::variance
                         ? 0.0
                         : z_threshold(model.params.spec, no_rule->second.count, model.meta.target);
    s.rows.push_back({"R " + std::to_string(model.rules.size()), "No rule activated", "No rule activated",
                      static_cast<double>(no_rule->second.count) / static_cast<double>(model.meta.n),
                      no_rule->second.mean, z, model.meta.no_rule_risk, model.meta.training_risk});
  }
  std::vector<Rule> plain;
  for (const auto& r : model.rules) plain.push_back(r.rule);
  s.occurrences = variable_occurrences(plain, names);
  return s;
}

inline std::string format_number(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string summary_text(const ModelSummary& s) {
  std::size_t wl = 4, wc = 10;
  for (const auto& r : s.rows) {
    wl = std::max(wl, r.label.size());
    wc = std::max(wc, r.conditions.size());
  }
  auto pad = [](std::string x, std::size_t w) {
    x.resize(std::max(w, x.size()), ' ');
    return x;
  };
  auto lpad = [](const std::string& x, std::size_t w) { return std::string(w > x.size() ? w - x.size() : 0, ' ') + x; };
  std::string out = pad("Rule", wl) + "  " + pad("Conditions", wc) + "  " + lpad("Coverage", 9) + "  " +
                    lpad("Prediction", 11) + "  " + lpad("Z", 9) + "  " + lpad("MSE", 11) + "\n";
  for (const auto& r : s.rows)
    out += pad(r.label, wl) + "  " + pad(r.conditions, wc) + "  " + lpad(format_number(r.coverage, 2), 9) + "  " +
           lpad(format_number(r.prediction), 11) + "  " + lpad(format_number(r.z), 9) + "  " +
           lpad(format_number(r.mse), 11) + "\n";
  if (!s.occurrences.empty()) {
    out += "\nVariable occurrences:";
    for (const auto& [name, c] : s.occurrences) out += " " + name + ":" + std::to_string(c);
    out += "\n";
  }
  return out;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string summary_csv(const ModelSummary& s) {
  std::string out = "rule,conditions,raw_conditions,coverage,prediction,z,mse,cumulative_mse\n";
  for (const auto& r : s.rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g\n", r.coverage, r.prediction, r.z, r.mse,
                  r.cumulative_mse);
    out += csv_quote(r.label) + "," + csv_quote(r.conditions) + "," + csv_quote(r.raw_conditions) + buf;
  }
  return out;
}

struct VarianceAuditRow {
  std::string label;
  double deviation = 0.0;
  double z = 0.0;
  bool passes = false;
};

/// Re-screens the selected rules with the variance-based threshold on the
/// given (training) sample. Rules with fewer than two activations are
/// reported as failing with z = +inf.
inline std::vector<VarianceAuditRow> variance_audit(const RuleModel& model, const Dataset& data) {
  std::vector<BitVector> bits;
  for (const auto& r : model.rules) bits.push_back(activation_vector(r.rule, data.disc));
  const double mu_all = mean(data.y);
  std::vector<VarianceAuditRow> out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    VarianceAuditRow row{model.rules[i].rule.label, std::abs(conditional_mean(bits[i], data.y) - mu_all)};
    if (bits[i].count() < 2) {
      row.z = kNeverSignificant;
    } else {
      row.z = variance_z(bits, i, data.y);
    }
    row.passes = row.deviation >= row.z;
    out.push_back(row);
  }
  return out;
}

}  // namespace ripe

#endif  // RIPE_PREDICT_HPP
