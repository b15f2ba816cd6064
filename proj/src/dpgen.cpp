#include "structeval/dpgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval::dpgen {

const std::string& NoisyHistogram::draw(rng::Rng& rng) const {
  double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& [key, weight] : bins) {
    acc += weight;
    if (u < acc) return key;
  }
  return bins.back().first;  // guard against rounding at the top end
}

double laplace_quantile(double u, double scale) {
  double x = u - 0.5;
  if (x == 0.0) return 0.0;
  double sign = x > 0.0 ? 1.0 : -1.0;
  return -scale * sign * std::log(1.0 - 2.0 * std::abs(x));
}

double laplace_noise(double scale, rng::Rng& rng) {
  if (scale <= 0.0) throw Error(ErrorClass::User, "laplace_noise requires scale > 0");
  // Uniform strictly inside (0, 1) so the quantile stays finite.
  double u = (static_cast<double>(rng.bits() >> 11) + 0.5) * 0x1.0p-53;
  return laplace_quantile(u, scale);
}

namespace {

// Counts with a deterministic bin order fixed before noising.
struct RawHistogram {
  std::string name;
  std::vector<std::pair<std::string, double>> counts;
};

void noise_and_normalize(RawHistogram&& raw, double scale, rng::Rng& rng,
                         int denominator, double epsilon, HistogramSet& out) {
  NoisyHistogram h;
  h.name = std::move(raw.name);
  h.share_numerator = 1;
  h.share_denominator = denominator;
  h.epsilon_share = epsilon / static_cast<double>(denominator);
  double total = 0.0;
  h.bins.reserve(raw.counts.size());
  for (auto& [key, count] : raw.counts) {
    double noised = scale > 0.0 ? count + laplace_noise(scale, rng) : count;
    if (noised < 0.0) noised = 0.0;  // clamp
    h.bins.emplace_back(std::move(key), noised);
    total += noised;
  }
  if (total <= 0.0) {
    double uniform = 1.0 / static_cast<double>(h.bins.size());
    for (auto& [key, weight] : h.bins) weight = uniform;
  } else {
    for (auto& [key, weight] : h.bins) weight /= total;
  }
  out.histograms.push_back(std::move(h));
}

void collect_regex_leaves(const tree::ParseNode& node,
                          std::map<std::string, std::vector<std::string>>& texts) {
  if (node.terminal) {
    if (!node.literal) texts[node.node_type].push_back(node.text);
    return;
  }
  for (const tree::ParseNode& c : node.children) collect_regex_leaves(c, texts);
}

}  // namespace

HistogramSet fit_histograms(const corpus::Corpus& real, const grammar::Grammar& g,
                            const DpParams& params, rng::Rng& rng) {
  if (!(params.epsilon > 0.0))
    throw Error(ErrorClass::User, "epsilon must be positive");

  std::map<std::string, std::vector<int>> star_counts;
  std::map<std::string, std::vector<std::string>> terminal_texts;
  std::size_t parsed = 0;
  for (const corpus::Sample& s : real.samples) {
    grammar::ParseOutcome o = grammar::parse(g, s.text);
    if (!o.parsed) continue;
    ++parsed;
    for (const auto& [aux, counts] : o.tree->star_counts) {
      for (int c : counts)
        star_counts[aux].push_back(std::min(c, params.repetition_cap));
    }
    collect_regex_leaves(o.tree->root, terminal_texts);
  }
  if (parsed == 0) throw NoParsedSamplesError();

  // Deterministic histogram order: stars in grammar rule order, then per
  // regex terminal (grammar order) a unigram table and a length table.
  std::vector<RawHistogram> raw;
  for (const grammar::Rule& rule : g.rules()) {
    if (!rule.auxiliary) continue;
    auto it = star_counts.find(rule.head);
    if (it == star_counts.end()) continue;
    std::map<int, double> table;
    for (int c : it->second) table[c] += 1.0;
    RawHistogram h;
    h.name = "star:" + rule.head;
    for (const auto& [count, weight] : table)
      h.counts.emplace_back(std::to_string(count), weight);
    raw.push_back(std::move(h));
  }
  for (const grammar::Terminal& t : g.terminals()) {
    if (t.kind != grammar::TerminalKind::Regex) continue;
    auto it = terminal_texts.find(t.name);
    if (it == terminal_texts.end()) continue;
    std::map<std::string, double> tokens;
    std::map<int, double> lengths;
    for (const std::string& occurrence : it->second) {
      auto toks = text::whitespace_tokens(occurrence);
      int len = std::min(static_cast<int>(toks.size()), params.length_cap);
      lengths[len] += 1.0;
      for (std::string& tok : toks) tokens[std::move(tok)] += 1.0;
    }
    // Top-V vocabulary by true count, ties broken lexicographically.
    std::vector<std::pair<std::string, double>> vocab(tokens.begin(), tokens.end());
    std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(vocab.size()) > params.vocab_cap)
      vocab.resize(params.vocab_cap);
    RawHistogram unigram;
    unigram.name = "tokens:" + t.name;
    unigram.counts = std::move(vocab);
    raw.push_back(std::move(unigram));
    RawHistogram length_hist;
    length_hist.name = "lengths:" + t.name;
    for (const auto& [len, weight] : lengths)
      length_hist.counts.emplace_back(std::to_string(len), weight);
    raw.push_back(std::move(length_hist));
  }

  HistogramSet out;
  out.epsilon = params.epsilon;
  const int denominator = static_cast<int>(raw.size());
  if (denominator == 0) return out;  // grammar with neither stars nor regex terminals
  const double scale = std::isinf(params.epsilon)
                           ? 0.0
                           : static_cast<double>(denominator) / params.epsilon;
  for (RawHistogram& h : raw)
    noise_and_normalize(std::move(h), scale, rng, denominator, params.epsilon, out);

  // Budget bookkeeping must be exact: shares are 1/H each over H histograms.
  int numerators = 0;
  for (const NoisyHistogram& h : out.histograms) {
    if (h.share_denominator != denominator)
      throw Error(ErrorClass::User, "epsilon bookkeeping is inconsistent");
    numerators += h.share_numerator;
  }
  if (numerators != denominator)
    throw Error(ErrorClass::User, "epsilon shares do not sum to the budget");
  return out;
}

namespace {

class Generator {
 public:
  Generator(const grammar::Grammar& g, const HistogramSet& hists, const DpParams& params,
            rng::Rng& rng)
      : g_(g), hists_(hists), params_(params), rng_(rng) {}

  std::string sample() {
    std::string out;
    expand_rule(g_.start_rule(), 0, out);
    return out;
  }

 private:
  void expand_rule(int rule, int depth, std::string& out) {
    if (depth > params_.max_derivation_depth)
      throw DepthExceededError("generation exceeded max_derivation_depth = " +
                               std::to_string(params_.max_derivation_depth));
    const grammar::Rule& r = g_.rules()[rule];
    if (r.auxiliary) {
      // Star rule: the repetition count comes from its histogram; the body is
      // the recursive alternative minus the trailing self-reference.
      int count = 0;
      if (const NoisyHistogram* h = hists_.find("star:" + r.head))
        count = std::stoi(h->draw(rng_));
      const auto& body = r.alternatives[1];
      for (int rep = 0; rep < count; ++rep)
        for (std::size_t s = 0; s + 1 < body.size(); ++s)
          expand_symbol(body[s], depth + 1, out);
      return;
    }
    std::size_t choice =
        r.alternatives.size() == 1 ? 0 : rng_.below(r.alternatives.size());
    for (const grammar::Symbol& sym : r.alternatives[choice])
      expand_symbol(sym, depth + 1, out);
  }

  void expand_symbol(const grammar::Symbol& sym, int depth, std::string& out) {
    if (!sym.is_terminal) {
      expand_rule(sym.index, depth, out);
      return;
    }
    const grammar::Terminal& t = g_.terminals()[sym.index];
    if (t.kind == grammar::TerminalKind::Literal) {
      out += t.pattern;
      return;
    }
    const NoisyHistogram* lengths = hists_.find("lengths:" + t.name);
    const NoisyHistogram* tokens = hists_.find("tokens:" + t.name);
    if (lengths == nullptr || tokens == nullptr) {
      out += "x";  // terminal unseen in the real data; the parse check decides
      return;
    }
    int len = std::stoi(lengths->draw(rng_));
    for (int i = 0; i < len; ++i) {
      if (i > 0) out += ' ';
      out += tokens->draw(rng_);
    }
  }

  const grammar::Grammar& g_;
  const HistogramSet& hists_;
  const DpParams& params_;
  rng::Rng& rng_;
};

}  // namespace

corpus::Corpus generate(const grammar::Grammar& g, const HistogramSet& hists,
                        const DpParams& params, rng::Rng& rng) {
  corpus::Corpus out;
  out.role = corpus::CorpusRole::Synthetic;
  out.source_path = "dpgen";
  Generator generator(g, hists, params, rng);
  constexpr int kMaxAttempts = 25;
  for (std::size_t i = 0; i < params.n_samples; ++i) {
    std::string sample_text;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      sample_text = generator.sample();
      if (grammar::parse(g, sample_text).parsed) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw Error(ErrorClass::User,
                  "generation failed to produce a grammar-valid sample after " +
                      std::to_string(kMaxAttempts) + " attempts");
    out.samples.push_back({std::to_string(i), std::move(sample_text)});
  }
  return out;
}

corpus::Corpus run(const grammar::Grammar& g, const corpus::Corpus& real,
                   const DpParams& params) {
  rng::Rng rng(params.seed);
  HistogramSet hists = fit_histograms(real, g, params, rng);
  return generate(g, hists, params, rng);
}

}  // namespace structeval::dpgen
