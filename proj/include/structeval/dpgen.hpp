#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "structeval/corpus.hpp"
#include "structeval/grammar.hpp"
#include "structeval/rng.hpp"

namespace structeval::dpgen {

struct DpParams {
  double epsilon = 1.0;  // > 0; +infinity disables noise (zero-scale test hook)
  double delta = 0.0;    // fixed at 0
  std::uint64_t seed = 0;
  std::size_t n_samples = 1;
  int max_derivation_depth = 64;
  int repetition_cap = 16;  // star counts clamp here
  int vocab_cap = 1024;     // top-V unigram truncation per regex terminal
  int length_cap = 256;     // token-length clamp per regex terminal
};

// Laplace-noised, clamped, normalized count table. Bins keep a deterministic
// order; weights form a probability vector (uniform fallback when every bin
// clamps to zero). The epsilon share is tracked as an exact fraction of the
// total budget.
struct NoisyHistogram {
  std::string name;
  std::vector<std::pair<std::string, double>> bins;
  double epsilon_share = 0.0;
  int share_numerator = 1;
  int share_denominator = 1;

  const std::string& draw(rng::Rng& rng) const;
};

struct HistogramSet {
  std::vector<NoisyHistogram> histograms;
  double epsilon = 0.0;

  const NoisyHistogram* find(const std::string& name) const {
    for (const NoisyHistogram& h : histograms)
      if (h.name == name) return &h;
    return nullptr;
  }
};

// Inverse-CDF draw from Laplace(0, scale).
double laplace_quantile(double u, double scale);
double laplace_noise(double scale, rng::Rng& rng);

// Builds per-star repetition histograms, and per-regex-terminal unigram and
// token-length histograms, from the parseable real samples. The budget splits
// evenly: each histogram's counts get Laplace noise of scale H/epsilon
// (add/remove-one-sample sensitivity modeled as 1 per histogram).
HistogramSet fit_histograms(const corpus::Corpus& real, const grammar::Grammar& g,
                            const DpParams& params, rng::Rng& rng);

// Seeded sampling of grammar derivations driven by the noised histograms;
// every emitted sample parses under the grammar.
corpus::Corpus generate(const grammar::Grammar& g, const HistogramSet& hists,
                        const DpParams& params, rng::Rng& rng);

// fit + generate on one seeded stream.
corpus::Corpus run(const grammar::Grammar& g, const corpus::Corpus& real,
                   const DpParams& params);

}  // namespace structeval::dpgen
