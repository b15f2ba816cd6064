#include "structeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "structeval/errors.hpp"
#include "structeval/io.hpp"
#include "structeval/text.hpp"

namespace structeval::report {

using metrics::Direction;
using nlohmann::json;

namespace {

// The paper's zero rule: a method's metric scores 0 when it is not applicable,
// when the metric is CFG-PR itself at 0, or when a structural metric belongs
// to a report whose CFG-PR is 0.
bool zeroed(const EvalReport& report, const MetricResult& m) {
  if (!m.applicable()) return true;
  if (m.name == "cfg_pass_rate" && *m.value == 0.0) return true;
  if (m.structural) {
    const MetricResult* pr = report.find("cfg_pass_rate");
    if (pr != nullptr && pr->applicable() && *pr->value == 0.0) return true;
  }
  return false;
}

}  // namespace

std::vector<RescaledScore> rescale(const std::vector<EvalReport>& reports,
                                   const std::string& metric_name,
                                   const std::map<std::string, double>& bounds) {
  std::size_t containing = 0;
  for (const EvalReport& r : reports)
    if (r.find(metric_name) != nullptr) ++containing;
  if (containing < 2) throw MetricAbsentError(metric_name);

  Direction dir = Direction::HigherBetter;
  for (const EvalReport& r : reports) {
    if (const MetricResult* m = r.find(metric_name)) {
      dir = m->direction;
      break;
    }
  }
  double bound = dir == Direction::HigherBetter ? 1.0 : 0.0;
  if (auto it = bounds.find(metric_name); it != bounds.end()) bound = it->second;

  std::optional<double> worst;
  for (const EvalReport& r : reports) {
    const MetricResult* m = r.find(metric_name);
    if (m == nullptr || zeroed(r, *m)) continue;
    double v = *m->value;
    if (!worst) worst = v;
    else worst = dir == Direction::HigherBetter ? std::min(*worst, v) : std::max(*worst, v);
  }

  std::vector<RescaledScore> out;
  out.reserve(reports.size());
  for (const EvalReport& r : reports) {
    RescaledScore s;
    s.metric = metric_name;
    const MetricResult* m = r.find(metric_name);
    if (m != nullptr && m->applicable()) s.raw = m->value;
    if (m == nullptr || zeroed(r, *m)) {
      s.score = 0.0;
    } else if (!worst || *worst == bound) {
      s.score = 100.0;
    } else {
      double v = *m->value;
      double span = dir == Direction::HigherBetter ? bound - *worst : *worst - bound;
      double gain = dir == Direction::HigherBetter ? v - *worst : *worst - v;
      s.score = 20.0 + 80.0 * gain / span;
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> metric_column_order(const std::vector<EvalReport>& reports) {
  std::vector<std::string> order;
  for (const EvalReport& r : reports)
    for (const MetricResult& m : r.metrics)
      if (std::find(order.begin(), order.end(), m.name) == order.end())
        order.push_back(m.name);
  return order;
}

}  // namespace

CompareOutput compare(const std::vector<EvalReport>& reports,
                      const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ConfigError("compare needs at least one report");
  for (const EvalReport& r : reports)
    if (r.dataset != reports.front().dataset)
      throw MixedDatasetsError(reports.front().dataset + " vs " + r.dataset);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  std::vector<std::string> columns = metric_column_order(reports);

  std::string raw = "method";
  for (const std::string& c : columns) raw += "," + csv_escape(c);
  raw += "\n";
  for (const EvalReport& r : reports) {
    raw += csv_escape(r.method);
    for (const std::string& c : columns) {
      const MetricResult* m = r.find(c);
      raw += ",";
      if (m == nullptr) continue;
      raw += m->applicable() ? text::format_double(*m->value) : "n/a";
    }
    raw += "\n";
  }

  // Rescaled table: columns that appear in fewer than two reports cannot be
  // rescaled and are omitted.
  std::string rescaled = "method";
  std::vector<std::pair<std::string, std::vector<RescaledScore>>> score_columns;
  for (const std::string& c : columns) {
    std::size_t containing = 0;
    for (const EvalReport& r : reports)
      if (r.find(c) != nullptr) ++containing;
    if (containing < 2) continue;
    rescaled += "," + csv_escape(c);
    score_columns.emplace_back(c, rescale(reports, c));
  }
  rescaled += "\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    rescaled += csv_escape(reports[i].method);
    for (const auto& [name, scores] : score_columns)
      rescaled += "," + text::format_double(scores[i].score);
    rescaled += "\n";
  }

  json bundle;
  bundle["schema_version"] = 1;
  bundle["dataset"] = reports.front().dataset;
  bundle["reports"] = json::array();
  for (const EvalReport& r : reports)
    bundle["reports"].push_back(json::parse(report_to_json(r)));

  CompareOutput out;
  out.raw_csv = out_dir / "raw.csv";
  out.rescaled_csv = out_dir / "rescaled.csv";
  out.bundle_json = out_dir / "reports.json";
  io::write_file(out.raw_csv, raw);
  io::write_file(out.rescaled_csv, rescaled);
  io::write_file(out.bundle_json, bundle.dump(2) + "\n");
  return out;
}

namespace {

json metric_to_json(const MetricResult& m) {
  json j;
  j["name"] = m.name;
  if (m.applicable()) j["value"] = *m.value;
  else j["value"] = "n/a";
  j["direction"] =
      m.direction == Direction::HigherBetter ? "higher-better" : "lower-better";
  j["support"] = m.support;
  j["structural"] = m.structural;
  j["metadata"] = m.metadata;
  return j;
}

MetricResult metric_from_json(const json& j) {
  MetricResult m;
  m.name = j.at("name").get<std::string>();
  if (j.at("value").is_number()) m.value = j["value"].get<double>();
  m.direction = j.at("direction").get<std::string>() == "higher-better"
                    ? Direction::HigherBetter
                    : Direction::LowerBetter;
  m.support = j.at("support").get<std::size_t>();
  m.structural = j.value("structural", false);
  if (j.contains("metadata"))
    m.metadata = j["metadata"].get<std::map<std::string, std::string>>();
  return m;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json j;
  j["schema_version"] = 1;
  j["dataset"] = report.dataset;
  j["method"] = report.method;
  if (report.epsilon) j["epsilon"] = *report.epsilon;
  else j["epsilon"] = nullptr;
  j["config_digest"] = report.config_digest;
  j["created_at"] = report.created_at;
  j["metrics"] = json::array();
  for (const MetricResult& m : report.metrics) j["metrics"].push_back(metric_to_json(m));
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& content) {
  json j = json::parse(content, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("report file is not valid JSON");
  EvalReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.method = j.at("method").get<std::string>();
  if (j.contains("epsilon") && j["epsilon"].is_number())
    r.epsilon = j["epsilon"].get<double>();
  r.config_digest = j.value("config_digest", "");
  r.created_at = j.value("created_at", "");
  for (const json& m : j.at("metrics")) r.metrics.push_back(metric_from_json(m));
  return r;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  io::write_file(path, report_to_json(report));
}

EvalReport load_report(const std::filesystem::path& path) {
  return report_from_json(io::read_file(path));
}

std::vector<EvalReport> load_bundle(const std::filesystem::path& path) {
  json j = json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.contains("reports"))
    throw ConfigError("bundle file is not a report bundle");
  std::vector<EvalReport> out;
  for (const json& r : j["reports"]) out.push_back(report_from_json(r.dump()));
  return out;
}

}  // namespace structeval::report
