#ifndef RIPE_EXPERIMENT_HPP
#define RIPE_EXPERIMENT_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ripe/core.hpp"
#include "ripe/predict.hpp"

namespace ripe {

/// Portable seeded stream: std::mt19937_64 words (fully specified by the
/// standard) converted to doubles here rather than through the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SyntheticData {
  Matrix<double> x;
  std::vector<double> y;
  std::vector<std::string> names;
  std::vector<std::size_t> informative;
};

/// Step function of the squared radius in the first two coordinates.
inline double circle_target(double x1, double x2) {
  const double r2 = x1 * x1 + x2 * x2;
  return -2.0 * (r2 > 0.8 ? 1.0 : 0.0) + 2.0 * (r2 < 0.5 ? 1.0 : 0.0);
}

/// Two uniform[-1,1] informative features, d-2 standard normal noise
/// features, standard normal additive noise.
inline SyntheticData gen_circle(std::size_t n, std::uint64_t seed, std::size_t d = 10) {
  if (n < 1) throw ParameterError("n must be positive");
  if (d < 2) throw ParameterError("circle data needs at least two features");
  Rng rng(seed);
  SyntheticData out{Matrix<double>(n, d), std::vector<double>(n), default_feature_names(d), {0, 1}};
  for (std::size_t i = 0; i < n; ++i) {
    out.x(i, 0) = rng.uniform(-1.0, 1.0);
    out.x(i, 1) = rng.uniform(-1.0, 1.0);
    for (std::size_t k = 2; k < d; ++k) out.x(i, k) = rng.normal();
    out.y[i] = circle_target(out.x(i, 0), out.x(i, 1)) + rng.normal();
  }
  return out;
}

/// Sparse linear model: standard normal features, p of them informative
/// with weights 100*U(0,1), plus noise_sd * N(0,1).
inline SyntheticData gen_linear(std::size_t n, std::size_t d, std::size_t p, double noise_sd, std::uint64_t seed) {
  if (p > d) throw ParameterError("informative count p exceeds dimension d");
  if (n < 1 || d < 1) throw ParameterError("n and d must be positive");
  if (noise_sd < 0) throw ParameterError("noise_sd must be non-negative");
  Rng rng(seed);
  std::vector<std::size_t> order(d);
  for (std::size_t k = 0; k < d; ++k) order[k] = k;
  for (std::size_t k = 0; k < p; ++k) std::swap(order[k], order[k + rng.below(d - k)]);
  std::vector<std::size_t> informative(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p));
  std::sort(informative.begin(), informative.end());
  std::vector<double> weights(p);
  for (auto& w : weights) w = 100.0 * rng.uniform();

  SyntheticData out{Matrix<double>(n, d), std::vector<double>(n), default_feature_names(d), informative};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) out.x(i, k) = rng.normal();
    double y = 0.0;
    for (std::size_t j = 0; j < p; ++j) y += weights[j] * out.x(i, informative[j]);
    out.y[i] = y + noise_sd * rng.normal();
  }
  return out;
}

/// MSE over the population variance of y.
inline double nmse(std::span<const double> predictions, std::span<const double> y) {
  const double mse = empirical_risk(predictions, y);
  const double m = mean(y);
  double var = 0.0;
  for (double v : y) var += (v - m) * (v - m);
  var /= static_cast<double>(y.size());
  if (var == 0.0) throw InputError("NMSE is undefined for a constant target");
  return mse / var;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle; the first round(fraction * n) rows go to training.
inline Split train_test_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("train_fraction must lie in (0, 1)");
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

inline std::pair<Matrix<double>, std::vector<double>> take_rows(const SyntheticData& data,
                                                                std::span<const std::size_t> rows) {
  Matrix<double> x(rows.size(), data.x.cols());
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < x.cols(); ++k) x(i, k) = data.x(rows[i], k);
    y[i] = data.y[rows[i]];
  }
  return {std::move(x), std::move(y)};
}

enum class ExperimentKind { circle, linear };

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "circle") return ExperimentKind::circle;
  if (s == "linear") return ExperimentKind::linear;
  throw ParameterError("unknown experiment kind '" + s + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::circle;
  std::size_t n = 5000;
  std::size_t d = 10;
  std::size_t p = 3;
  double noise_sd = 10.0;
  std::uint64_t seed = 42;
  double train_fraction = 0.6;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParameterError("train_fraction must lie in (0, 1)");
    if (n < 4) throw ParameterError("experiment needs n >= 4");
    if (kind == ExperimentKind::linear && p > d) throw ParameterError("p exceeds d");
    if (kind == ExperimentKind::circle && d < 2) throw ParameterError("circle needs d >= 2");
  }
};

struct GridPoint {
  double x1, x2, prediction;
};

struct ExperimentReport {
  double train_nmse = 0.0;
  double test_nmse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  RuleModel model;
  ModelSummary summary;
  std::vector<std::size_t> informative;
  // Share of all rule conditions that sit on informative features.
  double informative_condition_rate = 0.0;
  // Share of rules constraining informative features only.
  double informative_rule_rate = 0.0;
  std::vector<GridPoint> grid;  // circle only
  double fit_seconds = 0.0;
};

inline SyntheticData generate(const ExperimentConfig& config) {
  return config.kind == ExperimentKind::circle ? gen_circle(config.n, config.seed, config.d)
                                               : gen_linear(config.n, config.d, config.p, config.noise_sd, config.seed);
}

inline ExperimentReport run(const ExperimentConfig& config, const FitOptions& options) {
  config.validate();
  const auto data = generate(config);
  const auto split = train_test_split(config.n, config.train_fraction, config.seed);
  auto [x_train, y_train] = take_rows(data, split.train);
  auto [x_test, y_test] = take_rows(data, split.test);

  ExperimentReport report;
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  report.informative = data.informative;
  const auto start = std::chrono::steady_clock::now();
  report.model = fit(x_train, y_train, data.names, options);
  report.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.train_nmse = nmse(predict(report.model, x_train), y_train);
  report.test_nmse = nmse(predict(report.model, x_test), y_test);
  report.summary = summarize(report.model);

  const std::set<std::size_t> informative(data.informative.begin(), data.informative.end());
  std::size_t conditions = 0, on_informative = 0, pure_rules = 0;
  for (const auto& r : report.model.rules) {
    bool pure = true;
    for (const auto& [k, iv] : r.rule.conditions) {
      ++conditions;
      if (informative.contains(k))
        ++on_informative;
      else
        pure = false;
    }
    if (pure) ++pure_rules;
  }
  report.informative_condition_rate =
      conditions == 0 ? 0.0 : static_cast<double>(on_informative) / static_cast<double>(conditions);
  report.informative_rule_rate =
      report.model.rules.empty() ? 0.0
                                 : static_cast<double>(pure_rules) / static_cast<double>(report.model.rules.size());

  if (config.kind == ExperimentKind::circle) {
    std::vector<double> row(data.x.cols(), 0.0);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) {
        row[0] = -1.0 + 2.0 * i / 99.0;
        row[1] = -1.0 + 2.0 * j / 99.0;
        report.grid.push_back({row[0], row[1], predict(report.model, row)});
      }
  }
  return report;
}

/// Writes metrics.csv, rules.csv and (circle only) grid.csv into `dir`.
inline void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw InputError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("metrics.csv");
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "metric,value\ntrain_nmse,%.17g\ntest_nmse,%.17g\nn_train,%zu\nn_test,%zu\nrules,%zu\n"
                  "informative_condition_rate,%.17g\ninformative_rule_rate,%.17g\n",
                  report.train_nmse, report.test_nmse, report.n_train, report.n_test, report.model.rules.size(),
                  report.informative_condition_rate, report.informative_rule_rate);
    f << buf;
  }
  open("rules.csv") << summary_csv(report.summary);
  if (!report.grid.empty()) {
    auto f = open("grid.csv");
    f << "x1,x2,prediction\n";
    char buf[128];
    for (const auto& g : report.grid) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.x1, g.x2, g.prediction);
      f << buf;
    }
  }
}

}  // namespace ripe

#endif  // RIPE_EXPERIMENT_HPP
