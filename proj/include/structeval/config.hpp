#pragma once

#include <filesystem>
#include <string>

#include "structeval/metrics.hpp"

namespace structeval::config {

struct EvalConfig {
  std::string grammar_path;  // may be empty when given on the command line
  std::string dataset;
  std::string method;
  metrics::MetricConfig metric_config;
  std::string digest;  // SHA-256 of the canonical config JSON
};

// Schema-validated load: unknown keys are rejected and every violation is
// reported at once in the ConfigError message.
EvalConfig load_eval_config(const std::filesystem::path& path);

// Defaults used when no config file is given: hash embedder (dimension 256),
// k = 3 euclidean, no patterns or attributes.
EvalConfig default_eval_config();

}  // namespace structeval::config
