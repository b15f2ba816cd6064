// Benchmark comparing the serial reference implementations against the
// OpenMP kernels, and checking that both produce identical results.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "structeval/embed.hpp"
#include "structeval/grammar.hpp"
#include "structeval/rng.hpp"
#include "structeval/stats.hpp"

using namespace structeval;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

embed::EmbeddingMatrix random_matrix(std::size_t n, int dim, std::uint64_t seed) {
  rng::Rng rng(seed);
  embed::EmbeddingMatrix m;
  m.dimension = dim;
  m.data.resize(n * dim);
  for (double& v : m.data) v = rng.uniform01() * 2.0 - 1.0;
  m.keys.resize(n);
  return m;
}

struct Timing {
  double serial_ms = 0;
  double parallel_ms = 0;
  bool identical = true;
};

void print_row(const char* name, const Timing& t) {
  std::printf("%-22s serial %9.1f ms   omp %9.1f ms   speedup %5.2fx   identical %s\n",
              name, t.serial_ms, t.parallel_ms,
              t.parallel_ms > 0 ? t.serial_ms / t.parallel_ms : 0.0,
              t.identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = argc > 1 ? std::stoul(argv[1]) : 1500;
  int dim = argc > 2 ? std::stoi(argv[2]) : 128;
  int k = 3;
  std::printf("points=%zu dim=%d threads=%d\n", n, dim, omp_get_max_threads());

  embed::EmbeddingMatrix points = random_matrix(n, dim, 17);
  embed::EmbeddingMatrix queries = random_matrix(n, dim, 23);

  {
    Timing t;
    double t0 = now_ms();
    stats::NeighborRadii ref = stats::reference::knn_radii(points, k,
                                                           stats::DistanceMetric::Euclidean);
    t.serial_ms = now_ms() - t0;
    t0 = now_ms();
    stats::NeighborRadii par =
        stats::knn_radii(points, k, stats::DistanceMetric::Euclidean);
    t.parallel_ms = now_ms() - t0;
    t.identical = ref.radii == par.radii;
    print_row("knn_radii", t);

    Timing c;
    t0 = now_ms();
    double ref_cov = stats::reference::coverage_fraction(queries, points, ref,
                                                         stats::DistanceMetric::Euclidean);
    c.serial_ms = now_ms() - t0;
    t0 = now_ms();
    double par_cov =
        stats::coverage_fraction(queries, points, ref, stats::DistanceMetric::Euclidean);
    c.parallel_ms = now_ms() - t0;
    c.identical = ref_cov == par_cov;
    print_row("coverage_fraction", c);
  }

  {
    // Hash embedding of a synthetic text batch.
    std::vector<std::string> texts;
    rng::Rng rng(31);
    texts.reserve(20000);
    for (int i = 0; i < 20000; ++i) {
      std::string t;
      int words = 5 + static_cast<int>(rng.below(20));
      for (int w = 0; w < words; ++w) {
        t += "tok" + std::to_string(rng.below(5000));
        t += ' ';
      }
      texts.push_back(std::move(t));
    }
    embed::EmbeddingConfig cfg;
    cfg.dimension = 256;
    Timing t;
    double t0 = now_ms();
    embed::EmbeddingMatrix serial = embed::embed_texts(cfg, texts, 1);
    t.serial_ms = now_ms() - t0;
    t0 = now_ms();
    embed::EmbeddingMatrix parallel = embed::embed_texts(cfg, texts, 0);
    t.parallel_ms = now_ms() - t0;
    t.identical = serial.data == parallel.data;
    print_row("embed_texts(hash)", t);
  }

  {
    // Parse fan-out over a conversation corpus.
    grammar::Grammar g = grammar::load_grammar(
        "sharegpt: conversation (conversation)*\n"
        "conversation: query response\n"
        "query: \"HUMAN: \" query_text\n"
        "response: \"GPT: \" response_text\n"
        "query_text: /(?s).+?(?=(?:GPT: |$))/\n"
        "response_text: /(?s).+?(?=(?:HUMAN: |$))/\n");
    std::vector<std::string> samples;
    rng::Rng rng(47);
    for (int i = 0; i < 2000; ++i) {
      std::string s;
      int rounds = 1 + static_cast<int>(rng.below(4));
      for (int r = 0; r < rounds; ++r) {
        s += "HUMAN: question " + std::to_string(rng.below(1000)) + " please ";
        s += "GPT: answer " + std::to_string(rng.below(1000)) + " indeed ";
      }
      samples.push_back(std::move(s));
    }
    Timing t;
    std::size_t parsed_serial = 0, parsed_parallel = 0;
    double t0 = now_ms();
    for (const std::string& s : samples)
      if (grammar::parse(g, s).parsed) ++parsed_serial;
    t.serial_ms = now_ms() - t0;
    t0 = now_ms();
#pragma omp parallel for schedule(dynamic) reduction(+ : parsed_parallel)
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (grammar::parse(g, samples[i]).parsed) ++parsed_parallel;
    t.parallel_ms = now_ms() - t0;
    t.identical = parsed_serial == parsed_parallel && parsed_serial == samples.size();
    print_row("parse fan-out", t);
  }

  return 0;
}
