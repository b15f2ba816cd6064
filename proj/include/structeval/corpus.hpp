#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "structeval/grammar.hpp"

namespace structeval::corpus {

enum class CorpusRole { Real, Synthetic };

struct Sample {
  std::string id;
  std::string text;
};

struct Corpus {
  std::vector<Sample> samples;
  std::string source_path;
  CorpusRole role = CorpusRole::Real;
};

enum class CorpusFormat { Jsonl, Lines };

// jsonl: one {"id": ..., "text": ...} object per non-blank line, id defaulting
// to the 0-based record ordinal. lines: every physical line is a sample.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   CorpusRole role);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

enum class AttrLevel { Sample, Node };
enum class AttrKind { Numeric, Categorical };

struct AttributeSource {
  enum Kind { Builtin, Sidecar, RegexCapture } kind = Builtin;
  std::string builtin_name;  // token_length | num_nodes | node_type
  std::string num_nodes_scope = "key";  // "key" or "all", num_nodes only
  std::string sidecar_real;
  std::string sidecar_synth;
  std::string sidecar_key = "value";  // record field holding the value
  std::string capture_pattern;        // regex with optional capture group 1
};

struct AttributeSpec {
  std::string name;
  AttrLevel level = AttrLevel::Sample;
  AttrKind kind = AttrKind::Numeric;
  std::string node_type;  // node-level specs: which nodes feed the column
  AttributeSource source;
};

struct AttributeValue {
  AttrKind kind = AttrKind::Numeric;
  double num = 0.0;
  std::string cat;
};

struct AttributeCell {
  std::string sample_id;
  int node_ordinal = -1;  // -1 for sample-level cells
  bool missing = false;
  AttributeValue value;
};

struct AttributeColumn {
  AttributeSpec spec;
  std::vector<AttributeCell> cells;

  std::size_t present_count() const {
    std::size_t n = 0;
    for (const AttributeCell& c : cells)
      if (!c.missing) ++n;
    return n;
  }
};

struct AttributeTable {
  std::vector<AttributeColumn> columns;
  const AttributeColumn* find(const std::string& name) const {
    for (const AttributeColumn& c : columns)
      if (c.spec.name == name) return &c;
    return nullptr;
  }
};

// JSONL of {id, <key>} records, type-checked against the spec's kind. Numeric
// specs accept JSON numbers and numeric strings.
std::map<std::string, AttributeValue> load_sidecar_labels(
    const std::filesystem::path& path, const AttributeSpec& spec);

struct Materialized {
  std::vector<grammar::ParseOutcome> outcomes;  // aligned with corpus.samples
  AttributeTable table;
  std::size_t parsed_count = 0;
};

// Parses every sample once (fanning out over `jobs` threads, deterministic
// sample order) and computes attribute columns over the parsed samples only:
// failed samples feed the CFG pass-rate denominator and nothing else.
Materialized materialize(const Corpus& corpus, const grammar::Grammar& g,
                         const std::vector<AttributeSpec>& specs,
                         const std::set<std::string>& key_types, int jobs = 0);

struct TstrSplit {
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

// Seeded deterministic split written as JSONL {id, text, label} records.
TstrSplit export_tstr_split(const Corpus& corpus,
                            const std::map<std::string, AttributeValue>& labels,
                            double test_fraction, std::uint64_t seed,
                            const std::filesystem::path& train_path,
                            const std::filesystem::path& test_path);

}  // namespace structeval::corpus
