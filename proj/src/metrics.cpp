#include "structeval/metrics.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "structeval/errors.hpp"
#include "structeval/io.hpp"
#include "structeval/text.hpp"

namespace structeval::metrics {

using nlohmann::json;

MetricResult cfg_pass_rate(const std::vector<grammar::ParseOutcome>& outcomes) {
  if (outcomes.empty()) throw EmptyCorpusError("cfg_pass_rate");
  std::size_t parsed = 0;
  for (const grammar::ParseOutcome& o : outcomes)
    if (o.parsed) ++parsed;
  MetricResult r;
  r.name = "cfg_pass_rate";
  r.direction = Direction::HigherBetter;
  r.structural = true;
  r.support = outcomes.size();
  r.value = static_cast<double>(parsed) / static_cast<double>(outcomes.size());
  return r;
}

namespace {

struct PairTexts {
  std::string sample_id;
  int pair_index = 0;
  std::string a_text;
  std::string b_text;
};

std::vector<PairTexts> collect_pattern_pairs(const corpus::Corpus& corpus,
                                             const corpus::Materialized& mat,
                                             const treequery::KeyPairPattern& pattern) {
  std::vector<PairTexts> out;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const grammar::ParseOutcome& o = mat.outcomes[i];
    if (!o.parsed) continue;
    auto pairs = treequery::match_pairs(o.tree->root, pattern);
    int index = 0;
    for (const treequery::NodePair& p : pairs) {
      out.push_back({corpus.samples[i].id, index++, p.a->content_text(),
                     p.b->content_text()});
    }
  }
  return out;
}

// Sidecar dependency scores: JSONL of {id, pair, value[, pattern]}.
std::map<std::pair<std::string, int>, double> load_pair_scores(
    const std::string& path, const std::string& pattern_label) {
  std::map<std::pair<std::string, int>, double> scores;
  std::istringstream in(io::read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
        !record.contains("pair") || !record.contains("value"))
      throw MalformedRecordError(line_no, "pair-score records need id, pair, value");
    if (record.contains("pattern") &&
        record["pattern"].get<std::string>() != pattern_label)
      continue;
    std::string id = record["id"].is_string() ? record["id"].get<std::string>()
                                              : record["id"].dump();
    scores[{id, record["pair"].get<int>()}] = record["value"].get<double>();
  }
  return scores;
}

MetricResult not_applicable(const std::string& name, Direction dir, bool structural,
                            const std::string& reason) {
  MetricResult r;
  r.name = name;
  r.direction = dir;
  r.structural = structural;
  r.support = 0;
  r.metadata["reason"] = reason;
  return r;
}

// One pooled similarity distribution per corpus side.
std::optional<std::vector<double>> dependency_scores(const std::vector<PairTexts>& pairs,
                                                     const MetricConfig& cfg,
                                                     const std::string& score_path,
                                                     const std::string& pattern_label,
                                                     std::size_t* zero_pairs,
                                                     std::string* failure) {
  std::vector<double> sims;
  sims.reserve(pairs.size());
  if (cfg.dependency.kind == DependencyFunction::SidecarScores) {
    auto scores = load_pair_scores(score_path, pattern_label);
    for (const PairTexts& p : pairs) {
      auto it = scores.find({p.sample_id, p.pair_index});
      if (it == scores.end()) {
        *failure = "missing sidecar score for (" + p.sample_id + ", " +
                   std::to_string(p.pair_index) + ")";
        return std::nullopt;
      }
      sims.push_back(it->second);
    }
    return sims;
  }

  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const PairTexts& p : pairs) {
    texts.push_back(p.a_text);
    texts.push_back(p.b_text);
  }
  embed::EmbeddingMatrix m = embed::embed_texts(cfg.embedding, texts, cfg.jobs);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto u = m.row(2 * i);
    auto v = m.row(2 * i + 1);
    bool zu = std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
    bool zv = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (zu || zv) ++*zero_pairs;
    sims.push_back(embed::cosine_similarity(u, v));
  }
  return sims;
}

}  // namespace

MetricResult key_node_dependency(const corpus::Corpus& real,
                                 const corpus::Materialized& real_mat,
                                 const corpus::Corpus& synth,
                                 const corpus::Materialized& synth_mat,
                                 const treequery::KeyPairPattern& pattern,
                                 const MetricConfig& cfg) {
  const std::string name = "knd:" + pattern.label();
  auto real_pairs = collect_pattern_pairs(real, real_mat, pattern);
  auto synth_pairs = collect_pattern_pairs(synth, synth_mat, pattern);
  if (real_pairs.empty())
    return not_applicable(name, Direction::LowerBetter, true, "no pairs in real corpus");
  if (synth_pairs.empty())
    return not_applicable(name, Direction::LowerBetter, true, "no pairs in synthetic corpus");

  std::size_t zero_pairs = 0;
  std::string failure;
  auto real_sims = dependency_scores(real_pairs, cfg, cfg.dependency.real_path,
                                     pattern.label(), &zero_pairs, &failure);
  if (!real_sims) return not_applicable(name, Direction::LowerBetter, true, failure);
  auto synth_sims = dependency_scores(synth_pairs, cfg, cfg.dependency.synth_path,
                                      pattern.label(), &zero_pairs, &failure);
  if (!synth_sims) return not_applicable(name, Direction::LowerBetter, true, failure);

  MetricResult r;
  r.name = name;
  r.direction = Direction::LowerBetter;
  r.structural = true;
  r.support = synth_pairs.size();
  r.value = stats::wasserstein2(stats::EmpiricalDistribution::from_values(*real_sims),
                                stats::EmpiricalDistribution::from_values(*synth_sims));
  r.metadata["real_pairs"] = std::to_string(real_pairs.size());
  r.metadata["synth_pairs"] = std::to_string(synth_pairs.size());
  r.metadata["dependency"] =
      cfg.dependency.kind == DependencyFunction::Cosine ? "cosine" : "sidecar";
  if (zero_pairs > 0) r.metadata["zero_vector_pairs"] = std::to_string(zero_pairs);
  return r;
}

namespace {

std::optional<stats::EmpiricalDistribution> column_distribution(
    const corpus::AttributeTable& table, const corpus::AttributeSpec& spec) {
  const corpus::AttributeColumn* col = table.find(spec.name);
  if (col == nullptr || col->present_count() == 0) return std::nullopt;
  if (spec.kind == corpus::AttrKind::Numeric) {
    std::vector<double> values;
    values.reserve(col->cells.size());
    for (const corpus::AttributeCell& c : col->cells)
      if (!c.missing) values.push_back(c.value.num);
    return stats::EmpiricalDistribution::from_values(std::move(values));
  }
  std::map<std::string, std::uint64_t> counts;
  for (const corpus::AttributeCell& c : col->cells)
    if (!c.missing) ++counts[c.value.cat];
  return stats::EmpiricalDistribution::from_counts(std::move(counts));
}

}  // namespace

MetricResult attribute_match(const corpus::AttributeTable& real,
                             const corpus::AttributeTable& synth,
                             const corpus::AttributeSpec& spec) {
  const std::string name = "am:" + spec.name;
  auto dist_real = column_distribution(real, spec);
  auto dist_synth = column_distribution(synth, spec);
  if (!dist_real || !dist_synth)
    return not_applicable(name, Direction::LowerBetter, true,
                          "attribute missing or empty in " +
                              std::string(!dist_real ? "real" : "synthetic") + " corpus");

  MetricResult r;
  r.name = name;
  r.direction = Direction::LowerBetter;
  r.structural = true;
  r.support = dist_synth->observations();
  r.metadata["real_support"] = std::to_string(dist_real->observations());
  r.metadata["kind"] = spec.kind == corpus::AttrKind::Numeric ? "numeric" : "categorical";
  r.value = spec.kind == corpus::AttrKind::Numeric
                ? stats::wasserstein2(*dist_real, *dist_synth)
                : stats::total_variation(*dist_real, *dist_synth);
  return r;
}

std::pair<MetricResult, MetricResult> knn_precision_recall(const corpus::Corpus& real,
                                                           const corpus::Corpus& synth,
                                                           const MetricConfig& cfg) {
  if (real.samples.size() <= static_cast<std::size_t>(cfg.knn_k))
    throw KTooLargeError(cfg.knn_k, real.samples.size());
  if (synth.samples.size() <= static_cast<std::size_t>(cfg.knn_k))
    throw KTooLargeError(cfg.knn_k, synth.samples.size());

  std::vector<std::string> texts;
  texts.reserve(real.samples.size() + synth.samples.size());
  for (const corpus::Sample& s : real.samples) texts.push_back(s.text);
  for (const corpus::Sample& s : synth.samples) texts.push_back(s.text);
  embed::EmbeddingMatrix all = embed::embed_texts(cfg.embedding, texts, cfg.jobs);

  embed::EmbeddingMatrix real_m, synth_m;
  real_m.dimension = synth_m.dimension = all.dimension;
  const std::size_t nr = real.samples.size();
  real_m.keys.assign(all.keys.begin(), all.keys.begin() + nr);
  synth_m.keys.assign(all.keys.begin() + nr, all.keys.end());
  real_m.data.assign(all.data.begin(), all.data.begin() + nr * all.dimension);
  synth_m.data.assign(all.data.begin() + nr * all.dimension, all.data.end());

  stats::NeighborRadii real_radii = stats::knn_radii(real_m, cfg.knn_k, cfg.distance, cfg.jobs);
  stats::NeighborRadii synth_radii =
      stats::knn_radii(synth_m, cfg.knn_k, cfg.distance, cfg.jobs);

  MetricResult precision;
  precision.name = "knn_precision";
  precision.direction = Direction::HigherBetter;
  precision.support = synth.samples.size();
  precision.value = stats::coverage_fraction(synth_m, real_m, real_radii, cfg.distance, cfg.jobs);
  precision.metadata["k"] = std::to_string(cfg.knn_k);
  precision.metadata["metric"] = stats::metric_to_string(cfg.distance);

  MetricResult recall;
  recall.name = "knn_recall";
  recall.direction = Direction::HigherBetter;
  recall.support = real.samples.size();
  recall.value = stats::coverage_fraction(real_m, synth_m, synth_radii, cfg.distance, cfg.jobs);
  recall.metadata["k"] = std::to_string(cfg.knn_k);
  recall.metadata["metric"] = stats::metric_to_string(cfg.distance);
  return {precision, recall};
}

MetricResult type_token_ratio(const corpus::Corpus& corpus) {
  if (corpus.samples.empty()) throw EmptyCorpusError("type_token_ratio");
  std::unordered_set<std::string> unique;
  std::size_t total = 0;
  for (const corpus::Sample& s : corpus.samples) {
    for (std::string& token : text::whitespace_tokens(s.text)) {
      ++total;
      unique.insert(std::move(token));
    }
  }
  if (total == 0) throw NoTokensError();
  MetricResult r;
  r.name = "ttr";
  r.direction = Direction::HigherBetter;
  r.support = total;
  r.value = static_cast<double>(unique.size()) / static_cast<double>(total);
  r.metadata["unique_tokens"] = std::to_string(unique.size());
  return r;
}

EvalReport evaluate(const corpus::Corpus& real, const corpus::Corpus& synth,
                    const grammar::Grammar& g, const MetricConfig& cfg,
                    const RunInfo& info) {
  if (real.samples.empty()) throw EmptyCorpusError("real");
  if (synth.samples.empty()) throw EmptyCorpusError("synthetic");

  corpus::Materialized real_mat =
      corpus::materialize(real, g, cfg.attribute_specs, cfg.key_types, cfg.jobs);
  corpus::Materialized synth_mat =
      corpus::materialize(synth, g, cfg.attribute_specs, cfg.key_types, cfg.jobs);

  EvalReport report;
  report.dataset = info.dataset;
  report.method = info.method;
  report.epsilon = info.epsilon;
  report.config_digest = info.config_digest;
  report.created_at = info.created_at;

  auto guarded = [&](const std::string& name, Direction dir, bool structural,
                     auto&& compute) {
    try {
      report.metrics.push_back(compute());
    } catch (const Error& e) {
      report.metrics.push_back(not_applicable(name, dir, structural, e.what()));
    }
  };

  if (cfg.metric_enabled("cfg_pass_rate")) {
    MetricResult pr = cfg_pass_rate(synth_mat.outcomes);
    // Sanity value: a correct grammar should parse the real corpus fully.
    MetricResult real_pr = cfg_pass_rate(real_mat.outcomes);
    pr.metadata["real_value"] = text::format_double(*real_pr.value);
    pr.metadata["provider"] = cfg.embedding.provider == embed::Provider::Hash
                                  ? "hash"
                                  : "remote:" + cfg.embedding.model;
    report.metrics.push_back(std::move(pr));
  }

  if (cfg.metric_enabled("knd")) {
    for (const treequery::KeyPairPattern& pattern : cfg.key_pair_patterns) {
      guarded("knd:" + pattern.label(), Direction::LowerBetter, true, [&] {
        return key_node_dependency(real, real_mat, synth, synth_mat, pattern, cfg);
      });
    }
  }

  if (cfg.metric_enabled("am")) {
    for (const corpus::AttributeSpec& spec : cfg.attribute_specs) {
      guarded("am:" + spec.name, Direction::LowerBetter, true, [&] {
        return attribute_match(real_mat.table, synth_mat.table, spec);
      });
    }
  }

  if (cfg.metric_enabled("knn")) {
    try {
      auto [precision, recall] = knn_precision_recall(real, synth, cfg);
      report.metrics.push_back(std::move(precision));
      report.metrics.push_back(std::move(recall));
    } catch (const Error& e) {
      report.metrics.push_back(
          not_applicable("knn_precision", Direction::HigherBetter, false, e.what()));
      report.metrics.push_back(
          not_applicable("knn_recall", Direction::HigherBetter, false, e.what()));
    }
  }

  if (cfg.metric_enabled("ttr")) {
    guarded("ttr", Direction::HigherBetter, false,
            [&] { return type_token_ratio(synth); });
  }

  return report;
}

}  // namespace structeval::metrics
