#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "structeval/corpus.hpp"
#include "structeval/embed.hpp"
#include "structeval/grammar.hpp"
#include "structeval/stats.hpp"
#include "structeval/treequery.hpp"

namespace structeval::metrics {

enum class Direction { HigherBetter, LowerBetter };

struct MetricResult {
  std::string name;
  std::optional<double> value;  // nullopt = not applicable ("n/a")
  Direction direction = Direction::HigherBetter;
  std::size_t support = 0;
  bool structural = false;  // KND/AM: zeroed in radar scores when CFG-PR is 0
  std::map<std::string, std::string> metadata;

  bool applicable() const { return value.has_value(); }
};

// How pair dependencies are scored: node-embedding cosine (default) or scores
// ingested from a sidecar file keyed by (sample id, pair index).
struct DependencyFunction {
  enum Kind { Cosine, SidecarScores } kind = Cosine;
  std::string real_path;
  std::string synth_path;
};

struct MetricConfig {
  std::vector<treequery::KeyPairPattern> key_pair_patterns;
  std::vector<corpus::AttributeSpec> attribute_specs;
  std::set<std::string> key_types;  // empty = all named nodes
  int knn_k = 3;
  stats::DistanceMetric distance = stats::DistanceMetric::Euclidean;
  embed::EmbeddingConfig embedding;
  DependencyFunction dependency;
  // Empty enables everything; otherwise a subset of
  // {cfg_pass_rate, knd, am, knn, ttr}.
  std::set<std::string> enabled;
  int jobs = 0;

  bool metric_enabled(const std::string& name) const {
    return enabled.empty() || enabled.count(name) > 0;
  }
};

struct EvalReport {
  std::string dataset;
  std::string method;
  std::optional<double> epsilon;
  std::string config_digest;
  std::string created_at;  // empty unless the caller pins a timestamp
  std::vector<MetricResult> metrics;

  const MetricResult* find(const std::string& name) const {
    for (const MetricResult& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }
};

struct RunInfo {
  std::string dataset;
  std::string method;
  std::optional<double> epsilon;
  std::string config_digest;
  std::string created_at;
};

MetricResult cfg_pass_rate(const std::vector<grammar::ParseOutcome>& outcomes);

MetricResult key_node_dependency(const corpus::Corpus& real,
                                 const corpus::Materialized& real_mat,
                                 const corpus::Corpus& synth,
                                 const corpus::Materialized& synth_mat,
                                 const treequery::KeyPairPattern& pattern,
                                 const MetricConfig& cfg);

MetricResult attribute_match(const corpus::AttributeTable& real,
                             const corpus::AttributeTable& synth,
                             const corpus::AttributeSpec& spec);

// (precision, recall). Non-structural: computed over every sample, parse
// status ignored.
std::pair<MetricResult, MetricResult> knn_precision_recall(const corpus::Corpus& real,
                                                           const corpus::Corpus& synth,
                                                           const MetricConfig& cfg);

MetricResult type_token_ratio(const corpus::Corpus& corpus);

// Materializes both corpora once and computes every enabled metric; individual
// metric failures degrade to not-applicable results, never abort the report.
EvalReport evaluate(const corpus::Corpus& real, const corpus::Corpus& synth,
                    const grammar::Grammar& g, const MetricConfig& cfg,
                    const RunInfo& info);

}  // namespace structeval::metrics
