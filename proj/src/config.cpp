#include "structeval/config.hpp"

#include <json.hpp>

#include "structeval/errors.hpp"
#include "structeval/io.hpp"
#include "structeval/text.hpp"

namespace structeval::config {

using nlohmann::json;

namespace {

class Violations {
 public:
  void add(const std::string& where, const std::string& what) {
    messages_.push_back(where + ": " + what);
  }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      add(where, "expected an object");
      return;
    }
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed)
        if (key == a) ok = true;
      if (!ok) add(where, "unknown key '" + key + "'");
    }
  }

  void raise_if_any() const {
    if (messages_.empty()) return;
    std::string joined = "invalid config:";
    for (const std::string& m : messages_) joined += "\n  - " + m;
    throw ConfigError(joined);
  }

 private:
  std::vector<std::string> messages_;
};

std::string get_string(const json& obj, const char* key, const std::string& where,
                       Violations& v, const std::string& fallback = "") {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) {
    v.add(where, std::string("'") + key + "' must be a string");
    return fallback;
  }
  return obj[key].get<std::string>();
}

void parse_pattern(const json& j, const std::string& where, Violations& v,
                   metrics::MetricConfig& out) {
  v.check_keys(j, where, {"a", "b", "relation"});
  if (!j.is_object()) return;
  treequery::KeyPairPattern p;
  p.type_a = get_string(j, "a", where, v);
  p.type_b = get_string(j, "b", where, v);
  std::string relation = get_string(j, "relation", where, v, "next-sibling");
  if (p.type_a.empty()) v.add(where, "'a' is required");
  if (p.type_b.empty()) v.add(where, "'b' is required");
  try {
    p.relation = treequery::relation_from_string(relation);
  } catch (const Error& e) {
    v.add(where, e.what());
  }
  out.key_pair_patterns.push_back(std::move(p));
}

void parse_attribute(const json& j, const std::string& where, Violations& v,
                     metrics::MetricConfig& out) {
  v.check_keys(j, where, {"name", "level", "kind", "node_type", "source"});
  if (!j.is_object()) return;
  corpus::AttributeSpec spec;
  spec.name = get_string(j, "name", where, v);
  if (spec.name.empty()) v.add(where, "'name' is required");
  std::string level = get_string(j, "level", where, v, "sample");
  if (level == "sample") spec.level = corpus::AttrLevel::Sample;
  else if (level == "node") spec.level = corpus::AttrLevel::Node;
  else v.add(where, "'level' must be sample or node");
  std::string kind = get_string(j, "kind", where, v, "numeric");
  if (kind == "numeric") spec.kind = corpus::AttrKind::Numeric;
  else if (kind == "categorical") spec.kind = corpus::AttrKind::Categorical;
  else v.add(where, "'kind' must be numeric or categorical");
  spec.node_type = get_string(j, "node_type", where, v);

  if (!j.contains("source") || !j["source"].is_object()) {
    v.add(where, "'source' object is required");
    return;
  }
  const json& src = j["source"];
  v.check_keys(src, where + ".source", {"builtin", "scope", "sidecar", "regex_capture"});
  int variants = 0;
  if (src.contains("builtin")) {
    ++variants;
    spec.source.kind = corpus::AttributeSource::Builtin;
    spec.source.builtin_name = get_string(src, "builtin", where + ".source", v);
    spec.source.num_nodes_scope = get_string(src, "scope", where + ".source", v, "key");
    if (spec.source.num_nodes_scope != "key" && spec.source.num_nodes_scope != "all")
      v.add(where + ".source", "'scope' must be key or all");
    const std::string& b = spec.source.builtin_name;
    if (b != "token_length" && b != "num_nodes" && b != "node_type") {
      v.add(where + ".source", "unknown builtin '" + b + "'");
    } else {
      if (b == "num_nodes" && spec.level != corpus::AttrLevel::Sample)
        v.add(where, "num_nodes is a sample-level attribute");
      if (b == "node_type" && spec.level != corpus::AttrLevel::Node)
        v.add(where, "node_type is a node-level attribute");
      if (b == "node_type" && spec.kind != corpus::AttrKind::Categorical)
        v.add(where, "node_type is categorical");
      if ((b == "token_length" || b == "num_nodes") &&
          spec.kind != corpus::AttrKind::Numeric)
        v.add(where, b + " is numeric");
    }
  }
  if (src.contains("sidecar")) {
    ++variants;
    spec.source.kind = corpus::AttributeSource::Sidecar;
    const json& sc = src["sidecar"];
    v.check_keys(sc, where + ".source.sidecar", {"real", "synth", "key"});
    if (sc.is_object()) {
      spec.source.sidecar_real = get_string(sc, "real", where + ".source.sidecar", v);
      spec.source.sidecar_synth = get_string(sc, "synth", where + ".source.sidecar", v);
      spec.source.sidecar_key = get_string(sc, "key", where + ".source.sidecar", v, "value");
      if (spec.source.sidecar_real.empty() || spec.source.sidecar_synth.empty())
        v.add(where + ".source.sidecar", "'real' and 'synth' paths are required");
    }
    if (spec.level != corpus::AttrLevel::Sample)
      v.add(where, "sidecar attributes are sample-level (records are keyed by sample id)");
  }
  if (src.contains("regex_capture")) {
    ++variants;
    spec.source.kind = corpus::AttributeSource::RegexCapture;
    const json& rc = src["regex_capture"];
    v.check_keys(rc, where + ".source.regex_capture", {"pattern"});
    if (rc.is_object()) {
      spec.source.capture_pattern =
          get_string(rc, "pattern", where + ".source.regex_capture", v);
      if (spec.source.capture_pattern.empty())
        v.add(where + ".source.regex_capture", "'pattern' is required");
    }
  }
  if (variants != 1)
    v.add(where + ".source", "exactly one of builtin, sidecar, regex_capture");
  if (spec.level == corpus::AttrLevel::Node && spec.node_type.empty() &&
      spec.source.kind != corpus::AttributeSource::Builtin)
    v.add(where, "node-level attributes should name a node_type");
  out.attribute_specs.push_back(std::move(spec));
}

EvalConfig parse_config(const json& root) {
  Violations v;
  EvalConfig cfg;
  v.check_keys(root, "config",
               {"grammar", "key_nodes", "key_node_pairs", "attributes", "knn",
                "embedding", "dependency_function", "metrics", "report", "jobs"});
  v.raise_if_any();  // unknown top-level keys make field errors noisy

  cfg.grammar_path = get_string(root, "grammar", "config", v);

  if (root.contains("key_nodes")) {
    if (!root["key_nodes"].is_array()) {
      v.add("key_nodes", "must be an array of node types");
    } else {
      for (const json& k : root["key_nodes"]) {
        if (!k.is_string()) v.add("key_nodes", "entries must be strings");
        else cfg.metric_config.key_types.insert(k.get<std::string>());
      }
    }
  }

  if (root.contains("key_node_pairs")) {
    if (!root["key_node_pairs"].is_array()) v.add("key_node_pairs", "must be an array");
    else {
      int i = 0;
      for (const json& p : root["key_node_pairs"])
        parse_pattern(p, "key_node_pairs[" + std::to_string(i++) + "]", v,
                      cfg.metric_config);
    }
  }

  if (root.contains("attributes")) {
    if (!root["attributes"].is_array()) v.add("attributes", "must be an array");
    else {
      int i = 0;
      for (const json& a : root["attributes"])
        parse_attribute(a, "attributes[" + std::to_string(i++) + "]", v,
                        cfg.metric_config);
    }
  }

  if (root.contains("knn")) {
    const json& knn = root["knn"];
    v.check_keys(knn, "knn", {"k", "metric"});
    if (knn.is_object()) {
      if (knn.contains("k")) {
        if (!knn["k"].is_number_integer() || knn["k"].get<int>() < 1)
          v.add("knn", "'k' must be an integer >= 1");
        else cfg.metric_config.knn_k = knn["k"].get<int>();
      }
      if (knn.contains("metric")) {
        try {
          cfg.metric_config.distance =
              stats::metric_from_string(get_string(knn, "metric", "knn", v));
        } catch (const Error& e) {
          v.add("knn", e.what());
        }
      }
    }
  }

  if (root.contains("embedding")) {
    const json& e = root["embedding"];
    v.check_keys(e, "embedding",
                 {"provider", "dimension", "model", "endpoint", "cache_dir",
                  "batch_size", "max_retries"});
    if (e.is_object()) {
      std::string provider = get_string(e, "provider", "embedding", v, "hash");
      if (provider == "hash") cfg.metric_config.embedding.provider = embed::Provider::Hash;
      else if (provider == "remote")
        cfg.metric_config.embedding.provider = embed::Provider::Remote;
      else v.add("embedding", "'provider' must be hash or remote");
      if (e.contains("dimension")) {
        if (!e["dimension"].is_number_integer() || e["dimension"].get<int>() < 2)
          v.add("embedding", "'dimension' must be an integer >= 2");
        else cfg.metric_config.embedding.dimension = e["dimension"].get<int>();
      }
      cfg.metric_config.embedding.model =
          get_string(e, "model", "embedding", v, provider == "hash" ? "hash" : "");
      cfg.metric_config.embedding.endpoint = get_string(e, "endpoint", "embedding", v);
      cfg.metric_config.embedding.cache_dir = get_string(e, "cache_dir", "embedding", v);
      if (e.contains("batch_size") && e["batch_size"].is_number_integer())
        cfg.metric_config.embedding.batch_size = e["batch_size"].get<int>();
      if (e.contains("max_retries") && e["max_retries"].is_number_integer())
        cfg.metric_config.embedding.max_retries = e["max_retries"].get<int>();
      if (provider == "remote" && cfg.metric_config.embedding.endpoint.empty())
        v.add("embedding", "remote provider requires 'endpoint'");
    }
  }

  if (root.contains("dependency_function")) {
    const json& d = root["dependency_function"];
    v.check_keys(d, "dependency_function", {"kind", "real", "synth"});
    if (d.is_object()) {
      std::string kind = get_string(d, "kind", "dependency_function", v, "cosine");
      if (kind == "cosine") {
        cfg.metric_config.dependency.kind = metrics::DependencyFunction::Cosine;
      } else if (kind == "sidecar") {
        cfg.metric_config.dependency.kind = metrics::DependencyFunction::SidecarScores;
        cfg.metric_config.dependency.real_path =
            get_string(d, "real", "dependency_function", v);
        cfg.metric_config.dependency.synth_path =
            get_string(d, "synth", "dependency_function", v);
        if (cfg.metric_config.dependency.real_path.empty() ||
            cfg.metric_config.dependency.synth_path.empty())
          v.add("dependency_function", "sidecar kind requires 'real' and 'synth' paths");
      } else {
        v.add("dependency_function", "'kind' must be cosine or sidecar");
      }
    }
  }

  if (root.contains("metrics")) {
    if (!root["metrics"].is_array()) v.add("metrics", "must be an array");
    else {
      for (const json& m : root["metrics"]) {
        std::string name = m.is_string() ? m.get<std::string>() : std::string();
        if (name != "cfg_pass_rate" && name != "knd" && name != "am" && name != "knn" &&
            name != "ttr")
          v.add("metrics", "unknown metric '" + (m.is_string() ? name : m.dump()) + "'");
        else cfg.metric_config.enabled.insert(name);
      }
    }
  }

  if (root.contains("report")) {
    const json& r = root["report"];
    v.check_keys(r, "report", {"dataset", "method"});
    if (r.is_object()) {
      cfg.dataset = get_string(r, "dataset", "report", v);
      cfg.method = get_string(r, "method", "report", v);
    }
  }

  if (root.contains("jobs")) {
    if (!root["jobs"].is_number_integer() || root["jobs"].get<int>() < 0)
      v.add("jobs", "must be a non-negative integer");
    else cfg.metric_config.jobs = root["jobs"].get<int>();
  }

  v.raise_if_any();
  return cfg;
}

}  // namespace

EvalConfig load_eval_config(const std::filesystem::path& path) {
  std::string content = io::read_file(path);
  json root = json::parse(content, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw ConfigError("config file is not a JSON object: " + path.string());
  EvalConfig cfg = parse_config(root);
  cfg.digest = text::sha256_hex(root.dump());
  return cfg;
}

EvalConfig default_eval_config() {
  EvalConfig cfg;
  cfg.digest = text::sha256_hex("{}");
  return cfg;
}

}  // namespace structeval::config
