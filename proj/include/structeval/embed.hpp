#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace structeval::embed {

enum class Provider { Hash, Remote };

struct EmbeddingConfig {
  Provider provider = Provider::Hash;
  int dimension = 256;
  std::string model = "hash";  // remote model name; part of the cache key
  std::string endpoint;        // remote only, e.g. http://host:port/v1/embeddings
  std::string cache_dir;       // empty disables the on-disk cache
  int batch_size = 64;
  int max_retries = 3;
};

struct EmbeddingMatrix {
  std::vector<std::string> keys;  // content digests, one per input text
  std::vector<double> data;       // row-major rows() x dimension
  int dimension = 0;

  std::size_t rows() const { return dimension == 0 ? 0 : data.size() / dimension; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
};

// Embeds texts through the configured provider, consulting the cache first.
//
// hash: deterministic feature hashing — whitespace tokens are hashed to a bin
// with a hash-derived sign, accumulated exactly, then L2-normalized; the empty
// text maps to the zero vector. remote: batched POSTs of
// {"model": ..., "input": [...]} expecting {"data": [{"embedding": [...]}]},
// with bounded retries on transport errors and 5xx responses.
EmbeddingMatrix embed_texts(const EmbeddingConfig& cfg,
                            const std::vector<std::string>& texts, int jobs = 0);

// u.v / (|u||v|); defined as 0 when either operand is the zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

std::filesystem::path cache_path(const EmbeddingConfig& cfg);

}  // namespace structeval::embed
