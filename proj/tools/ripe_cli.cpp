#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ripe/ripe.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct MiningFlags {
  std::size_t mn = 5;
  double alpha = 0.05;
  std::string z = "bernstein";
  std::size_t beam = 300;
  std::size_t max_complexity = 0;
  bool fallback_mean = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mn", mn, "number of modalities per feature")->capture_default_str();
    cmd->add_option("--alpha", alpha, "significance level")->capture_default_str();
    cmd->add_option("--z", z, "significance function")
        ->check(CLI::IsMember({"hoeffding", "bernstein"}))
        ->capture_default_str();
    cmd->add_option("--max-rules-beam", beam, "rules of complexity 1 and c-1 intersected per level (M)")
        ->capture_default_str();
    cmd->add_option("--max-complexity", max_complexity, "cap on rule complexity (0 = number of features)");
    cmd->add_flag("--fallback-mean", fallback_mean, "predict the training mean for unseen cells instead of 0");
  }

  ripe::FitOptions options(unsigned threads) const {
    ripe::FitOptions o;
    o.params.modalities = mn;
    o.params.spec = {ripe::parse_z_kind(z), alpha};
    o.params.beam_width = beam;
    o.params.max_complexity = max_complexity;
    o.params.threads = threads;
    o.fallback_mean = fallback_mean;
    return o;
  }
};

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("RIPE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

void warn_about_modalities(std::size_t mn, std::size_t n, std::size_t d) {
  if (mn == 2) warn("m_n = 2 makes the coverage bound 1/ln(m_n) exceed 1");
  const double cells = std::pow(static_cast<double>(mn), static_cast<double>(std::min<std::size_t>(d, 8)));
  if (cells > static_cast<double>(n))
    warn("m_n^min(d,8) = " + std::to_string(static_cast<long long>(cells)) + " exceeds n = " + std::to_string(n) +
         "; consider fewer modalities");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int fit_cmd(const std::string& data_path, const std::string& target, const std::string& out_path,
            const std::string& summary_csv_path, const MiningFlags& flags, unsigned threads) {
  const auto table = ripe::read_csv_file(data_path);
  auto data = ripe::to_training_data(table, target);
  if (data.y.empty()) throw ripe::InputError("no data rows in '" + data_path + "'");
  warn_about_modalities(flags.mn, data.y.size(), data.x.cols());

  const auto model = ripe::fit(data.x, std::move(data.y), data.names, flags.options(threads));
  if (model.rules.empty()) warn("no suitable rules found; the model predicts the global mean");
  ripe::save_model_file(model, out_path);

  const auto summary = ripe::summarize(model);
  std::cout << ripe::summary_text(summary);
  std::cout << "suitable_rules=" << model.meta.suitable_rules << "\nselected_rules=" << model.rules.size()
            << "\ntraining_mse=" << ripe::format_number(model.meta.training_risk, 6)
            << "\nconstant_mse=" << ripe::format_number(model.meta.constant_risk, 6) << "\n";
  if (!summary_csv_path.empty()) {
    std::ofstream f(summary_csv_path);
    if (!f) throw ripe::InputError("cannot write '" + summary_csv_path + "'");
    f << ripe::summary_csv(summary);
  }
  return 0;
}

int predict_cmd(const std::string& model_path, const std::string& data_path, const std::string& out_path,
                bool with_explain) {
  const auto model = ripe::load_model_file(model_path);
  const auto table = ripe::read_csv_file(data_path);
  const auto data = ripe::to_numeric(table, model.meta.feature_names);
  std::ofstream out(out_path);
  if (!out) throw ripe::InputError("cannot write '" + out_path + "'");
  out << "prediction" << (with_explain ? ",rules" : "") << "\n";
  for (std::size_t i = 0; i < data.x.rows(); ++i) {
    out << fmt17(ripe::predict(model, data.x.row(i)));
    if (with_explain) out << "," << ripe::csv_quote(ripe::explain_labels(ripe::explain(model, data.x.row(i))));
    out << "\n";
  }
  return 0;
}

int eval_cmd(const std::string& model_path, const std::string& data_path, const std::string& target) {
  const auto model = ripe::load_model_file(model_path);
  const auto table = ripe::read_csv_file(data_path);
  const auto data = ripe::to_numeric(table, model.meta.feature_names, target);
  if (data.y.empty()) throw ripe::InputError("no data rows in '" + data_path + "'");
  const auto pred = ripe::predict(model, data.x);
  std::cout << "n=" << data.y.size() << "\nmse=" << fmt17(ripe::empirical_risk(pred, data.y))
            << "\nnmse=" << fmt17(ripe::nmse(pred, data.y)) << "\n";
  return 0;
}

int audit_cmd(const std::string& model_path, const std::string& data_path, const std::string& target) {
  const auto model = ripe::load_model_file(model_path);
  const auto table = ripe::read_csv_file(data_path);
  auto data = ripe::to_numeric(table, model.meta.feature_names, target);
  const auto dataset = ripe::make_dataset(std::move(data.x), std::move(data.y), model.discretizer, data.names);
  const auto rows = ripe::variance_audit(model, dataset);
  std::size_t violations = 0;
  std::cout << "rule,deviation,z,passes\n";
  for (const auto& r : rows) {
    std::cout << ripe::csv_quote(r.label) << "," << fmt17(r.deviation) << "," << fmt17(r.z) << ","
              << (r.passes ? "yes" : "no") << "\n";
    violations += r.passes ? 0 : 1;
  }
  std::cerr << "variance audit: " << violations << " of " << rows.size() << " rules below threshold\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIPE: rule induction partitioning estimator"};
  app.require_subcommand(1);
  std::optional<unsigned> threads_flag;
  app.add_option("--threads", threads_flag, "worker threads (default: RIPE_THREADS or 1)");

  std::string data_path, target, out_path, model_path, summary_csv;
  bool with_explain = false;
  MiningFlags fit_flags, exp_flags;

  auto* fit = app.add_subcommand("fit", "mine and select rules, write a model file");
  fit->add_option("--data", data_path, "training CSV with header")->required();
  fit->add_option("--target", target, "target column name")->required();
  fit->add_option("--out", out_path, "model file to write")->required();
  fit->add_option("--summary-csv", summary_csv, "also write the rule summary as CSV");
  fit_flags.add_to(fit);

  auto* pred = app.add_subcommand("predict", "predict rows of a CSV");
  pred->add_option("--model", model_path)->required();
  pred->add_option("--data", data_path)->required();
  pred->add_option("--out", out_path)->required();
  pred->add_flag("--explain", with_explain, "add the activated rule labels");

  auto* eval = app.add_subcommand("eval", "report MSE and NMSE on a labelled CSV");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--target", target)->required();

  auto* audit = app.add_subcommand("audit", "re-screen selected rules with the variance-based threshold");
  audit->add_option("--model", model_path)->required();
  audit->add_option("--data", data_path)->required();
  audit->add_option("--target", target)->required();

  ripe::ExperimentConfig config;
  std::string kind = "circle", out_dir = "experiment_out";
  std::optional<std::size_t> n_flag, d_flag;
  auto* exp = app.add_subcommand("experiment", "run a synthetic benchmark");
  exp->add_option("--kind", kind, "circle or linear")->capture_default_str();
  exp->add_option("--n", n_flag, "sample size (circle 5000, linear 500)");
  exp->add_option("--d", d_flag, "features (circle 10, linear 50)");
  exp->add_option("--p", config.p, "informative features (linear)")->capture_default_str();
  exp->add_option("--noise-sd", config.noise_sd, "noise standard deviation (linear)")->capture_default_str();
  exp->add_option("--seed", config.seed)->capture_default_str();
  exp->add_option("--train-fraction", config.train_fraction)->capture_default_str();
  exp->add_option("--out-dir", out_dir)->capture_default_str();
  exp_flags.add_to(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const unsigned threads = resolve_threads(threads_flag);
  try {
    if (*fit) return fit_cmd(data_path, target, out_path, summary_csv, fit_flags, threads);
    if (*pred) return predict_cmd(model_path, data_path, out_path, with_explain);
    if (*eval) return eval_cmd(model_path, data_path, target);
    if (*audit) return audit_cmd(model_path, data_path, target);
    if (*exp) {
      config.kind = ripe::parse_experiment_kind(kind);
      const bool circle = config.kind == ripe::ExperimentKind::circle;
      config.n = n_flag.value_or(circle ? 5000 : 500);
      config.d = d_flag.value_or(circle ? 10 : 50);
      if (!circle && config.p == 0) warn("p = 0: the target carries no signal, expect a near-constant model");
      const auto report = ripe::run(config, exp_flags.options(threads));
      ripe::write_report(report, out_dir);
      std::cout << ripe::summary_text(report.summary) << "train_nmse=" << fmt17(report.train_nmse)
                << "\ntest_nmse=" << fmt17(report.test_nmse) << "\nrules=" << report.model.rules.size()
                << "\ninformative_condition_rate=" << fmt17(report.informative_condition_rate)
                << "\ninformative_rule_rate=" << fmt17(report.informative_rule_rate) << "\n";
      std::cerr << "fit_seconds=" << report.fit_seconds << "\n";
      return 0;
    }
  } catch (const ripe::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ripe::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ripe::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
