#include <CLI11.hpp>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "structeval/config.hpp"
#include "structeval/corpus.hpp"
#include "structeval/dpgen.hpp"
#include "structeval/errors.hpp"
#include "structeval/grammar.hpp"
#include "structeval/io.hpp"
#include "structeval/metrics.hpp"
#include "structeval/report.hpp"
#include "structeval/text.hpp"

namespace {

using namespace structeval;

corpus::CorpusFormat format_from_string(const std::string& s) {
  if (s == "jsonl") return corpus::CorpusFormat::Jsonl;
  if (s == "lines") return corpus::CorpusFormat::Lines;
  throw ConfigError("unknown corpus format: " + s);
}

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed) {
  if (seed_given) return seed;
  std::random_device entropy;
  std::uint64_t derived =
      (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
  std::printf("seed: %llu\n", static_cast<unsigned long long>(derived));
  return derived;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int cmd_validate_grammar(const std::string& path) {
  grammar::Grammar g = grammar::load_grammar(io::read_file(path));
  std::printf("grammar OK: %zu rules, %zu regex terminals, %zu literal terminals, start '%s'\n",
              g.rules().size(), g.regex_terminal_count(), g.literal_terminal_count(),
              g.start_symbol().c_str());
  return 0;
}

void check_patterns_against_grammar(const grammar::Grammar& g,
                                    const metrics::MetricConfig& cfg) {
  std::vector<std::string> violations;
  for (const treequery::KeyPairPattern& p : cfg.key_pair_patterns) {
    if (!g.has_node_type(p.type_a))
      violations.push_back("pattern type '" + p.type_a + "' is not in the grammar");
    if (!g.has_node_type(p.type_b))
      violations.push_back("pattern type '" + p.type_b + "' is not in the grammar");
  }
  for (const std::string& t : cfg.key_types)
    if (!g.has_node_type(t))
      violations.push_back("key node type '" + t + "' is not in the grammar");
  for (const corpus::AttributeSpec& spec : cfg.attribute_specs)
    if (!spec.node_type.empty() && !g.has_node_type(spec.node_type))
      violations.push_back("attribute '" + spec.name + "' names unknown node type '" +
                           spec.node_type + "'");
  if (violations.empty()) return;
  std::string joined = "config does not match the grammar:";
  for (const std::string& m : violations) joined += "\n  - " + m;
  throw ConfigError(joined);
}

void print_summary(const metrics::EvalReport& report) {
  std::printf("dataset: %s  method: %s\n", report.dataset.c_str(), report.method.c_str());
  std::printf("%-44s %14s %-13s %8s\n", "metric", "value", "direction", "support");
  for (const metrics::MetricResult& m : report.metrics) {
    std::string value = m.applicable() ? text::format_double(*m.value) : "n/a";
    std::printf("%-44s %14s %-13s %8zu\n", m.name.c_str(), value.c_str(),
                m.direction == metrics::Direction::HigherBetter ? "higher-better"
                                                                : "lower-better",
                m.support);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structeval — grammar-driven synthetic-data evaluation"};
  app.require_subcommand(1);

  // validate-grammar
  std::string vg_path;
  CLI::App* vg = app.add_subcommand("validate-grammar", "Load and check a grammar file");
  vg->add_option("path", vg_path, "grammar file (.cfg)")->required();

  // evaluate
  std::string ev_grammar, ev_real, ev_synth, ev_config, ev_out = "report.json";
  std::string ev_dataset, ev_method, ev_format = "jsonl", ev_timestamp;
  double ev_epsilon = 0.0;
  bool ev_epsilon_given = false;
  int ev_jobs = 0;
  CLI::App* ev = app.add_subcommand("evaluate", "Evaluate a synthetic corpus against a real one");
  ev->add_option("--grammar", ev_grammar, "grammar file");
  ev->add_option("--real", ev_real, "real corpus")->required();
  ev->add_option("--synth", ev_synth, "synthetic corpus")->required();
  ev->add_option("--config", ev_config, "eval config JSON");
  ev->add_option("--out", ev_out, "report output path");
  ev->add_option("--dataset", ev_dataset, "dataset name for the report");
  ev->add_option("--method", ev_method, "method name for the report");
  ev->add_option("--format", ev_format, "corpus format: jsonl | lines");
  ev->add_option("--timestamp", ev_timestamp, "timestamp recorded in the report");
  ev->add_option("--epsilon", ev_epsilon, "epsilon recorded in the report")
      ->each([&](const std::string&) { ev_epsilon_given = true; });
  ev->add_option("--jobs", ev_jobs, "per-sample parallelism (0 = all cores)");

  // gen
  std::string gen_grammar, gen_real, gen_out = "synth.jsonl", gen_format = "jsonl";
  double gen_epsilon = 1.0;
  std::size_t gen_n = 100;
  std::uint64_t gen_seed = 0;
  bool gen_seed_given = false;
  dpgen::DpParams gen_params;
  CLI::App* gen = app.add_subcommand("gen", "Toy DP generator: sample grammar derivations "
                                            "from Laplace-noised histograms");
  gen->add_option("--grammar", gen_grammar, "grammar file")->required();
  gen->add_option("--real", gen_real, "real corpus the histograms are fitted on")->required();
  gen->add_option("--epsilon", gen_epsilon, "privacy budget (inf disables noise)")->required();
  gen->add_option("--n", gen_n, "number of samples to generate");
  gen->add_option("--seed", gen_seed, "rng seed")
      ->each([&](const std::string&) { gen_seed_given = true; });
  gen->add_option("--out", gen_out, "output corpus path");
  gen->add_option("--format", gen_format, "real corpus format: jsonl | lines");
  gen->add_option("--rep-cap", gen_params.repetition_cap, "star repetition cap");
  gen->add_option("--vocab-cap", gen_params.vocab_cap, "unigram vocabulary cap");
  gen->add_option("--length-cap", gen_params.length_cap, "token length cap");
  gen->add_option("--max-depth", gen_params.max_derivation_depth, "derivation depth cap");

  // compare
  std::vector<std::string> cmp_reports;
  std::string cmp_out = "compare";
  CLI::App* cmp = app.add_subcommand("compare", "Aggregate reports into comparison tables");
  cmp->add_option("reports", cmp_reports, "report JSON files")->required()->expected(-1);
  cmp->add_option("--out", cmp_out, "output directory");

  // export-tstr
  std::string ts_corpus, ts_labels, ts_format = "jsonl", ts_label_kind = "categorical";
  std::string ts_label_key = "value", ts_train = "train.jsonl", ts_test = "test.jsonl";
  double ts_fraction = 0.2;
  std::uint64_t ts_seed = 0;
  bool ts_seed_given = false;
  CLI::App* ts = app.add_subcommand("export-tstr", "Export labeled train/test splits "
                                                   "(train-synthetic-test-real layout)");
  ts->add_option("--corpus", ts_corpus, "corpus to split")->required();
  ts->add_option("--labels", ts_labels, "sidecar label file {id, value}")->required();
  ts->add_option("--label-kind", ts_label_kind, "numeric | categorical");
  ts->add_option("--label-key", ts_label_key, "record field holding the label");
  ts->add_option("--test-fraction", ts_fraction, "fraction routed to the test split");
  ts->add_option("--seed", ts_seed, "rng seed")
      ->each([&](const std::string&) { ts_seed_given = true; });
  ts->add_option("--format", ts_format, "corpus format: jsonl | lines");
  ts->add_option("--out-train", ts_train, "train split path");
  ts->add_option("--out-test", ts_test, "test split path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (vg->parsed()) return cmd_validate_grammar(vg_path);

    if (ev->parsed()) {
      config::EvalConfig cfg = ev_config.empty() ? config::default_eval_config()
                                                 : config::load_eval_config(ev_config);
      if (ev_jobs > 0) cfg.metric_config.jobs = ev_jobs;
      std::string grammar_path = !ev_grammar.empty() ? ev_grammar : cfg.grammar_path;
      if (grammar_path.empty())
        throw ConfigError("no grammar: pass --grammar or set it in the config");
      grammar::Grammar g = grammar::load_grammar(io::read_file(grammar_path));
      check_patterns_against_grammar(g, cfg.metric_config);

      corpus::CorpusFormat format = format_from_string(ev_format);
      corpus::Corpus real = corpus::load_corpus(ev_real, format, corpus::CorpusRole::Real);
      corpus::Corpus synth =
          corpus::load_corpus(ev_synth, format, corpus::CorpusRole::Synthetic);

      metrics::RunInfo info;
      info.dataset = !ev_dataset.empty() ? ev_dataset
                     : !cfg.dataset.empty() ? cfg.dataset
                                            : stem_of(ev_real);
      info.method = !ev_method.empty() ? ev_method
                    : !cfg.method.empty() ? cfg.method
                                          : stem_of(ev_synth);
      if (ev_epsilon_given) info.epsilon = ev_epsilon;
      info.config_digest = cfg.digest;
      info.created_at = ev_timestamp;

      metrics::EvalReport report = metrics::evaluate(real, synth, g, cfg.metric_config, info);
      report::save_report(report, ev_out);
      print_summary(report);
      std::printf("report written to %s\n", ev_out.c_str());
      return 0;
    }

    if (gen->parsed()) {
      gen_params.epsilon = gen_epsilon;
      gen_params.n_samples = gen_n;
      gen_params.seed = resolve_seed(gen_seed_given, gen_seed);
      grammar::Grammar g = grammar::load_grammar(io::read_file(gen_grammar));
      corpus::Corpus real = corpus::load_corpus(gen_real, format_from_string(gen_format),
                                                corpus::CorpusRole::Real);
      corpus::Corpus synth = dpgen::run(g, real, gen_params);
      corpus::save_corpus(synth, gen_out);
      std::printf("generated %zu samples (epsilon=%s, seed=%llu) -> %s\n",
                  synth.samples.size(), text::format_double(gen_params.epsilon).c_str(),
                  static_cast<unsigned long long>(gen_params.seed), gen_out.c_str());
      return 0;
    }

    if (cmp->parsed()) {
      std::vector<metrics::EvalReport> reports;
      reports.reserve(cmp_reports.size());
      for (const std::string& path : cmp_reports)
        reports.push_back(report::load_report(path));
      report::CompareOutput out = report::compare(reports, cmp_out);
      std::printf("wrote %s, %s, %s\n", out.raw_csv.c_str(), out.rescaled_csv.c_str(),
                  out.bundle_json.c_str());
      return 0;
    }

    if (ts->parsed()) {
      corpus::Corpus c = corpus::load_corpus(ts_corpus, format_from_string(ts_format),
                                             corpus::CorpusRole::Real);
      corpus::AttributeSpec spec;
      spec.name = "label";
      spec.level = corpus::AttrLevel::Sample;
      spec.kind = ts_label_kind == "numeric" ? corpus::AttrKind::Numeric
                                             : corpus::AttrKind::Categorical;
      spec.source.kind = corpus::AttributeSource::Sidecar;
      spec.source.sidecar_key = ts_label_key;
      auto labels = corpus::load_sidecar_labels(ts_labels, spec);
      std::uint64_t seed = resolve_seed(ts_seed_given, ts_seed);
      corpus::TstrSplit split =
          corpus::export_tstr_split(c, labels, ts_fraction, seed, ts_train, ts_test);
      std::printf("train: %zu samples -> %s\ntest: %zu samples -> %s\n", split.train_count,
                  split.train_path.c_str(), split.test_count, split.test_path.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
