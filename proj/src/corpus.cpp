#include "structeval/corpus.hpp"

#include <omp.h>

#include <boost/regex.hpp>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "structeval/errors.hpp"
#include "structeval/io.hpp"
#include "structeval/rng.hpp"
#include "structeval/text.hpp"
#include "structeval/treequery.hpp"

namespace structeval::corpus {

using nlohmann::json;

namespace {

std::string id_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

std::optional<double> parse_number(const std::string& s) {
  double out = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) return std::nullopt;
  return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   CorpusRole role) {
  std::string content = io::read_file(path);
  Corpus corpus;
  corpus.source_path = path.string();
  corpus.role = role;
  std::unordered_set<std::string> ids;

  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  std::size_t ordinal = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (format == CorpusFormat::Lines) {
      Sample s;
      s.id = std::to_string(ordinal++);
      s.text = line;
      if (!ids.insert(s.id).second) throw DuplicateIdError(s.id);
      corpus.samples.push_back(std::move(s));
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object())
      throw MalformedRecordError(line_no, "not a JSON object");
    if (!record.contains("text") || !record["text"].is_string())
      throw MalformedRecordError(line_no, "missing string field 'text'");
    Sample s;
    s.text = record["text"].get<std::string>();
    s.id = record.contains("id") ? id_from_json(record["id"]) : std::to_string(ordinal);
    ++ordinal;
    if (!ids.insert(s.id).second) throw DuplicateIdError(s.id);
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const Sample& s : corpus.samples) {
    json record{{"id", s.id}, {"text", s.text}};
    out += record.dump();
    out += '\n';
  }
  io::write_file(path, out);
}

std::map<std::string, AttributeValue> load_sidecar_labels(
    const std::filesystem::path& path, const AttributeSpec& spec) {
  std::string content = io::read_file(path);
  std::map<std::string, AttributeValue> out;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id"))
      throw MalformedRecordError(line_no, "sidecar records need 'id'");
    const std::string key = spec.source.sidecar_key.empty() ? "value" : spec.source.sidecar_key;
    if (!record.contains(key))
      throw MalformedRecordError(line_no, "sidecar records need '" + key + "'");
    std::string id = id_from_json(record["id"]);
    const json& v = record[key];
    AttributeValue value;
    value.kind = spec.kind;
    if (spec.kind == AttrKind::Numeric) {
      if (v.is_number()) {
        value.num = v.get<double>();
      } else if (v.is_string()) {
        auto parsed = parse_number(v.get<std::string>());
        if (!parsed) throw TypeMismatchError(id);
        value.num = *parsed;
      } else {
        throw TypeMismatchError(id);
      }
      if (!std::isfinite(value.num)) throw TypeMismatchError(id);
    } else {
      if (v.is_string()) value.cat = v.get<std::string>();
      else if (v.is_number() || v.is_boolean()) value.cat = v.dump();
      else throw TypeMismatchError(id);
    }
    out[id] = std::move(value);
  }
  return out;
}

namespace {

struct CaptureRegex {
  boost::regex re;
  explicit CaptureRegex(const std::string& pattern) : re(pattern, boost::regex::perl) {}

  std::optional<std::string> apply(const std::string& text) const {
    boost::smatch m;
    if (!boost::regex_search(text, m, re)) return std::nullopt;
    if (m.size() > 1 && m[1].matched) return m[1].str();
    return m[0].str();
  }
};

void append_value(AttributeColumn& col, const std::string& sample_id, int node_ordinal,
                  const AttributeSpec& spec, const std::optional<std::string>& raw) {
  AttributeCell cell;
  cell.sample_id = sample_id;
  cell.node_ordinal = node_ordinal;
  if (!raw) {
    cell.missing = true;
    col.cells.push_back(std::move(cell));
    return;
  }
  cell.value.kind = spec.kind;
  if (spec.kind == AttrKind::Numeric) {
    auto parsed = parse_number(*raw);
    if (!parsed) {
      cell.missing = true;
    } else {
      cell.value.num = *parsed;
    }
  } else {
    cell.value.cat = *raw;
  }
  col.cells.push_back(std::move(cell));
}

}  // namespace

Materialized materialize(const Corpus& corpus, const grammar::Grammar& g,
                         const std::vector<AttributeSpec>& specs,
                         const std::set<std::string>& key_types, int jobs) {
  Materialized out;
  const std::size_t n = corpus.samples.size();
  out.outcomes.resize(n);

  int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::exception_ptr parse_error;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      out.outcomes[i] = grammar::parse(g, corpus.samples[i].text);
    } catch (...) {
#pragma omp critical
      if (!parse_error) parse_error = std::current_exception();
    }
  }
  if (parse_error) std::rethrow_exception(parse_error);

  for (const grammar::ParseOutcome& o : out.outcomes)
    if (o.parsed) ++out.parsed_count;

  // Sidecar files load once per spec.
  std::vector<std::map<std::string, AttributeValue>> sidecars(specs.size());
  std::vector<std::optional<CaptureRegex>> captures(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const AttributeSpec& spec = specs[s];
    if (spec.source.kind == AttributeSource::Sidecar) {
      const std::string& p = corpus.role == CorpusRole::Real ? spec.source.sidecar_real
                                                             : spec.source.sidecar_synth;
      if (p.empty()) throw ConfigError("attribute '" + spec.name + "' lacks a sidecar path");
      sidecars[s] = load_sidecar_labels(p, spec);
    } else if (spec.source.kind == AttributeSource::RegexCapture) {
      try {
        captures[s].emplace(spec.source.capture_pattern);
      } catch (const boost::regex_error& e) {
        throw BadRegexError(spec.name, e.what());
      }
    }
  }

  for (std::size_t s = 0; s < specs.size(); ++s) {
    const AttributeSpec& spec = specs[s];
    AttributeColumn col;
    col.spec = spec;
    for (std::size_t i = 0; i < n; ++i) {
      const grammar::ParseOutcome& o = out.outcomes[i];
      if (!o.parsed) continue;
      const std::string& id = corpus.samples[i].id;
      const tree::ParseNode& root = o.tree->root;

      if (spec.level == AttrLevel::Sample) {
        switch (spec.source.kind) {
          case AttributeSource::Builtin: {
            treequery::BuiltinAttribute b = treequery::builtin_from_name(spec.source.builtin_name);
            if (b == treequery::BuiltinAttribute::TokenLength) {
              append_value(col, id, -1, spec,
                           std::to_string(text::token_count(corpus.samples[i].text)));
            } else if (b == treequery::BuiltinAttribute::NumNodes) {
              const std::set<std::string>& scope =
                  spec.source.num_nodes_scope == "all" ? std::set<std::string>{} : key_types;
              append_value(col, id, -1, spec,
                           std::to_string(treequery::num_nodes(root, scope)));
            } else {
              throw UnknownAttributeError(spec.source.builtin_name + " (sample level)");
            }
            break;
          }
          case AttributeSource::Sidecar: {
            auto it = sidecars[s].find(id);
            if (it == sidecars[s].end()) {
              append_value(col, id, -1, spec, std::nullopt);
            } else {
              AttributeCell cell;
              cell.sample_id = id;
              cell.value = it->second;
              col.cells.push_back(std::move(cell));
            }
            break;
          }
          case AttributeSource::RegexCapture:
            append_value(col, id, -1, spec, captures[s]->apply(corpus.samples[i].text));
            break;
        }
        continue;
      }

      // Node level: one cell per selected node, in document order.
      std::set<std::string> wanted;
      if (!spec.node_type.empty()) wanted.insert(spec.node_type);
      else wanted = key_types;
      auto nodes = treequery::collect_nodes(root, wanted);
      int ordinal = 0;
      for (const tree::ParseNode* node : nodes) {
        switch (spec.source.kind) {
          case AttributeSource::Builtin: {
            treequery::BuiltinAttribute b = treequery::builtin_from_name(spec.source.builtin_name);
            if (b == treequery::BuiltinAttribute::TokenLength) {
              append_value(col, id, ordinal, spec,
                           std::to_string(treequery::token_length(*node)));
            } else if (b == treequery::BuiltinAttribute::NodeType) {
              append_value(col, id, ordinal, spec, node->node_type);
            } else {
              throw UnknownAttributeError(spec.source.builtin_name + " (node level)");
            }
            break;
          }
          case AttributeSource::RegexCapture:
            append_value(col, id, ordinal, spec, captures[s]->apply(node->content_text()));
            break;
          case AttributeSource::Sidecar:
            throw ConfigError("sidecar attributes are sample-level only: " + spec.name);
        }
        ++ordinal;
      }
    }
    out.table.columns.push_back(std::move(col));
  }
  return out;
}

TstrSplit export_tstr_split(const Corpus& corpus,
                            const std::map<std::string, AttributeValue>& labels,
                            double test_fraction, std::uint64_t seed,
                            const std::filesystem::path& train_path,
                            const std::filesystem::path& test_path) {
  const std::size_t n = corpus.samples.size();
  for (const Sample& s : corpus.samples)
    if (!labels.count(s.id)) throw MissingLabelError(s.id);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng::Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {  // Fisher–Yates
    std::size_t j = rng.below(i);
    std::swap(order[i - 1], order[j]);
  }

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test > n) n_test = n;
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) in_test[order[k]] = true;

  auto emit = [&](bool test_side) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_test[i] != test_side) continue;
      const Sample& s = corpus.samples[i];
      const AttributeValue& v = labels.at(s.id);
      json label = v.kind == AttrKind::Numeric ? json(v.num) : json(v.cat);
      json record{{"id", s.id}, {"text", s.text}, {"label", label}};
      out += record.dump();
      out += '\n';
    }
    return out;
  };

  io::write_file(train_path, emit(false));
  io::write_file(test_path, emit(true));
  return {train_path, test_path, n - n_test, n_test};
}

}  // namespace structeval::corpus
