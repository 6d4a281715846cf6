#ifndef RIPE_IO_HPP
#define RIPE_IO_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "ripe/predict.hpp"

namespace ripe {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("column '" + name + "' not found");
  }
};

/// RFC 4180 style reader: comma separated, optional double-quoted fields
/// with "" escapes, LF or CRLF line ends. The first record is the header.
inline CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw InputError("unterminated quoted field in CSV");
  if (any && (!field.empty() || !record.empty())) end_record();
  if (records.empty()) throw InputError("CSV input is empty");

  CsvTable t;
  t.header = std::move(records.front());
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw InputError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "'");
  return read_csv(f);
}

inline double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  std::size_t b = 0, e = text.size();
  while (b < e && (text[b] == ' ' || text[b] == '\t')) ++b;
  while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t')) --e;
  if (b < e && text[b] == '+') ++b;
  double v = 0.0;
  const auto res = std::from_chars(text.data() + b, text.data() + e, v);
  if (b == e || res.ec != std::errc{} || res.ptr != text.data() + e || !std::isfinite(v))
    throw InputError("non-numeric value '" + text + "' in column '" + column + "' at data row " +
                     std::to_string(row + 1));
  return v;
}

/// Numeric view of a table: the named feature columns (in the given order)
/// and optionally a target column.
struct NumericData {
  Matrix<double> x;
  std::vector<double> y;
  std::vector<std::string> names;
};

inline NumericData to_numeric(const CsvTable& t, const std::vector<std::string>& features,
                              const std::string& target = {}) {
  std::vector<std::size_t> cols;
  for (const auto& f : features) cols.push_back(t.column(f));
  const std::size_t target_col = target.empty() ? 0 : t.column(target);
  NumericData out{Matrix<double>(t.rows.size(), cols.size()), {}, features};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) out.x(r, k) = parse_number(t.rows[r][cols[k]], r, features[k]);
    if (!target.empty()) out.y.push_back(parse_number(t.rows[r][target_col], r, target));
  }
  return out;
}

/// All columns except `target` are features.
inline NumericData to_training_data(const CsvTable& t, const std::string& target) {
  t.column(target);
  std::vector<std::string> features;
  for (const auto& h : t.header)
    if (h != target) features.push_back(h);
  if (features.empty()) throw InputError("no feature columns besides the target");
  return to_numeric(t, features, target);
}

inline constexpr int kModelFormatVersion = 1;

using json = nlohmann::ordered_json;

inline json model_to_json(const RuleModel& m) {
  json j;
  j["format"] = "ripe-model";
  j["format_version"] = kModelFormatVersion;
  j["params"] = {{"m_n", m.params.modalities},
                 {"alpha", m.params.spec.alpha},
                 {"z", to_string(m.params.spec.kind)},
                 {"beam_width", m.params.beam_width},
                 {"max_complexity", m.params.max_complexity},
                 {"fallback_mean", m.fallback_mean}};
  json features = json::array();
  for (const auto& b : m.discretizer.bins()) {
    json f{{"edges", b.edges}, {"distinct_values", b.distinct_values}};
    if (b.distinct_values) f["values"] = b.values;
    features.push_back(std::move(f));
  }
  j["discretizer"] = {{"modalities", m.discretizer.modalities()}, {"features", std::move(features)}};
  json rules = json::array();
  for (const auto& r : m.rules) {
    json conds = json::array();
    for (const auto& [k, iv] : r.rule.conditions) conds.push_back({{"feature", k}, {"low", iv.low}, {"high", iv.high}});
    rules.push_back({{"label", r.rule.label},
                     {"conditions", std::move(conds)},
                     {"n_activated", r.n_activated},
                     {"coverage", r.coverage},
                     {"mu", r.mu},
                     {"z", r.z_value},
                     {"single_rule_risk", r.single_rule_risk},
                     {"cumulative_risk", r.cumulative_risk}});
  }
  j["rules"] = std::move(rules);
  json cells = json::array();
  for (const auto& [sig, st] : m.cells)
    cells.push_back({{"signature", sig.to_string()}, {"count", st.count}, {"mean", st.mean}});
  j["cells"] = std::move(cells);
  j["global_mean"] = m.global_mean;
  j["training"] = {{"n", m.meta.n},
                   {"d", m.meta.d},
                   {"feature_names", m.meta.feature_names},
                   {"target", {{"max", m.meta.target.max},
                               {"min", m.meta.target.min},
                               {"sum_squares", m.meta.target.sum_squares},
                               {"mean", m.meta.target.mean}}},
                   {"constant_risk", m.meta.constant_risk},
                   {"training_risk", m.meta.training_risk},
                   {"no_rule_risk", m.meta.no_rule_risk},
                   {"suitable_rules", m.meta.suitable_rules}};
  return j;
}

inline RuleModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "ripe-model") throw InputError("not a ripe model file");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw InputError("unsupported model format_version " + std::to_string(version));
    RuleModel m;
    const auto& p = j.at("params");
    m.params.modalities = p.at("m_n").get<std::size_t>();
    m.params.spec.alpha = p.at("alpha").get<double>();
    m.params.spec.kind = parse_z_kind(p.at("z").get<std::string>());
    m.params.beam_width = p.at("beam_width").get<std::size_t>();
    m.params.max_complexity = p.at("max_complexity").get<std::size_t>();
    m.fallback_mean = p.at("fallback_mean").get<bool>();

    std::vector<FeatureBins> bins;
    for (const auto& f : j.at("discretizer").at("features")) {
      FeatureBins b;
      b.edges = f.at("edges").get<std::vector<double>>();
      b.distinct_values = f.at("distinct_values").get<bool>();
      if (b.distinct_values) b.values = f.at("values").get<std::vector<double>>();
      bins.push_back(std::move(b));
    }
    m.discretizer = Discretizer(j.at("discretizer").at("modalities").get<std::size_t>(), std::move(bins));

    const auto& t = j.at("training");
    m.meta.n = t.at("n").get<std::size_t>();
    m.meta.d = t.at("d").get<std::size_t>();
    m.meta.feature_names = t.at("feature_names").get<std::vector<std::string>>();
    m.meta.target.n = m.meta.n;
    m.meta.target.max = t.at("target").at("max").get<double>();
    m.meta.target.min = t.at("target").at("min").get<double>();
    m.meta.target.sum_squares = t.at("target").at("sum_squares").get<double>();
    m.meta.target.mean = t.at("target").at("mean").get<double>();
    m.meta.constant_risk = t.at("constant_risk").get<double>();
    m.meta.training_risk = t.at("training_risk").get<double>();
    m.meta.no_rule_risk = t.at("no_rule_risk").get<double>();
    m.meta.suitable_rules = t.at("suitable_rules").get<std::size_t>();
    if (m.meta.d != m.discretizer.dimension() || m.meta.feature_names.size() != m.meta.d)
      throw InputError("model dimension is inconsistent");

    for (const auto& r : j.at("rules")) {
      SelectedRule s;
      s.rule.label = r.at("label").get<std::string>();
      for (const auto& c : r.at("conditions")) {
        const auto k = c.at("feature").get<std::size_t>();
        const Interval iv{c.at("low").get<Modality>(), c.at("high").get<Modality>()};
        if (k >= m.meta.d || iv.low > iv.high || iv.high >= m.discretizer.num_classes(k))
          throw InputError("rule '" + s.rule.label + "' has an invalid condition");
        if (!s.rule.conditions.emplace(k, iv).second)
          throw InputError("rule '" + s.rule.label + "' constrains a feature twice");
      }
      s.n_activated = r.at("n_activated").get<std::size_t>();
      s.coverage = r.at("coverage").get<double>();
      s.mu = r.at("mu").get<double>();
      s.z_value = r.at("z").get<double>();
      s.single_rule_risk = r.at("single_rule_risk").get<double>();
      s.cumulative_risk = r.at("cumulative_risk").get<double>();
      m.rules.push_back(std::move(s));
    }
    std::size_t total = 0;
    for (const auto& c : j.at("cells")) {
      auto sig = CellSignature::from_string(c.at("signature").get<std::string>());
      if (sig.size() != m.rules.size()) throw InputError("cell signature length does not match rule count");
      const CellStats st{c.at("count").get<std::size_t>(), c.at("mean").get<double>()};
      total += st.count;
      m.cells.emplace(std::move(sig), st);
    }
    if (total != m.meta.n) throw InputError("cell counts do not sum to the training size");
    m.global_mean = j.at("global_mean").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

inline std::string save_model(const RuleModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline RuleModel load_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline void save_model_file(const RuleModel& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << save_model(m);
}

inline RuleModel load_model_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open model '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load_model(ss.str());
}

}  // namespace ripe

#endif  // RIPE_IO_HPP
