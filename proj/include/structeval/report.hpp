#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "structeval/metrics.hpp"

namespace structeval::report {

using metrics::EvalReport;
using metrics::MetricResult;

struct RescaledScore {
  std::string metric;
  std::optional<double> raw;
  double score = 0.0;  // 0, or within [20, 100]
};

// Radar rescaling across methods: score 0 when CFG-PR is 0 or the metric is
// not applicable; otherwise linear from 20 (worst non-zeroed method) to 100
// (the metric's performance bound — 1 for rates, 0 for lower-better
// distances, overridable per metric). Requires the metric in at least two
// reports. Scores align with the input report order.
std::vector<RescaledScore> rescale(const std::vector<EvalReport>& reports,
                                   const std::string& metric_name,
                                   const std::map<std::string, double>& bounds = {});

struct CompareOutput {
  std::filesystem::path raw_csv;
  std::filesystem::path rescaled_csv;
  std::filesystem::path bundle_json;
};

// Emits a raw method x metric CSV, a rescaled CSV for radar plotting, and a
// JSON bundle. All reports must share a dataset name.
CompareOutput compare(const std::vector<EvalReport>& reports,
                      const std::filesystem::path& out_dir);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);
std::vector<EvalReport> load_bundle(const std::filesystem::path& path);

}  // namespace structeval::report
