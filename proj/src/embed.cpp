#include "structeval/embed.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <thread>
#include <unordered_map>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

// httplib is only needed for the remote provider.
#include <httplib.h>

namespace structeval::embed {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'E', 'V', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kDigestChars = 64;  // hex SHA-256

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back((std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')
                      ? c
                      : '_');
  return out;
}

std::string header_bytes(const EmbeddingConfig& cfg, const std::string& name) {
  std::string h(kMagic, 4);
  std::uint32_t version = kVersion;
  std::uint32_t dim = static_cast<std::uint32_t>(cfg.dimension);
  std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
  h.append(reinterpret_cast<const char*>(&version), 4);
  h.append(reinterpret_cast<const char*>(&dim), 4);
  h.append(reinterpret_cast<const char*>(&name_len), 4);
  h.append(name);
  std::uint64_t checksum = text::fnv1a64(h);
  h.append(reinterpret_cast<const char*>(&checksum), 8);
  return h;
}

std::string cache_name(const EmbeddingConfig& cfg) {
  return (cfg.provider == Provider::Hash ? std::string("hash") : std::string("remote")) +
         ":" + cfg.model;
}

class VectorCache {
 public:
  VectorCache(const EmbeddingConfig& cfg) : cfg_(cfg) {
    if (cfg.cache_dir.empty()) return;
    enabled_ = true;
    path_ = cache_path(cfg);
    load();
  }

  bool enabled() const { return enabled_; }

  const std::vector<double>* find(const std::string& digest) const {
    auto it = entries_.find(digest);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void append(const std::string& digest, const std::vector<double>& vec) {
    if (!enabled_) return;
    if (entries_.count(digest)) return;
    entries_.emplace(digest, vec);
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to embedding cache: " + path_.string());
    out.write(digest.data(), static_cast<std::streamsize>(digest.size()));
    out.write(reinterpret_cast<const char*>(vec.data()),
              static_cast<std::streamsize>(vec.size() * sizeof(double)));
  }

 private:
  void load() {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
    std::string expected = header_bytes(cfg_, cache_name(cfg_));
    if (!std::filesystem::exists(path_)) {
      std::ofstream out(path_, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot create embedding cache: " + path_.string());
      out.write(expected.data(), static_cast<std::streamsize>(expected.size()));
      return;
    }
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot open embedding cache: " + path_.string());
    std::string header(expected.size(), '\0');
    in.read(header.data(), static_cast<std::streamsize>(header.size()));
    if (static_cast<std::size_t>(in.gcount()) != header.size() || header != expected)
      throw CacheCorruptError(path_.string());
    const std::size_t record = kDigestChars + cfg_.dimension * sizeof(double);
    std::string digest(kDigestChars, '\0');
    std::vector<double> vec(cfg_.dimension);
    while (true) {
      in.read(digest.data(), kDigestChars);
      if (static_cast<std::size_t>(in.gcount()) < kDigestChars) break;  // truncated tail
      in.read(reinterpret_cast<char*>(vec.data()),
              static_cast<std::streamsize>(record - kDigestChars));
      if (static_cast<std::size_t>(in.gcount()) < record - kDigestChars) break;
      entries_[digest] = vec;
    }
  }

  EmbeddingConfig cfg_;
  bool enabled_ = false;
  std::filesystem::path path_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

std::vector<double> hash_embed(const std::string& text_in, int dimension) {
  std::vector<std::int64_t> bins(dimension, 0);
  for (const std::string& token : text::whitespace_tokens(text_in)) {
    std::uint64_t h = text::fnv1a64(token);
    std::size_t idx = h % static_cast<std::uint64_t>(dimension);
    bins[idx] += (h >> 63) ? -1 : 1;
  }
  std::vector<double> vec(dimension, 0.0);
  double norm_sq = 0.0;
  for (int i = 0; i < dimension; ++i) {
    vec[i] = static_cast<double>(bins[i]);
    norm_sq += vec[i] * vec[i];
  }
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
  }
  return vec;
}

struct Endpoint {
  std::string base;  // scheme://host:port
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("embedding endpoint must be a full URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<std::vector<double>> remote_embed(const EmbeddingConfig& cfg,
                                              const std::vector<std::string>& texts) {
  Endpoint ep = split_endpoint(cfg.endpoint);
  httplib::Client client(ep.base);
  client.set_read_timeout(30, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv("STRUCTEVAL_EMBED_TOKEN"))
    headers.emplace("Authorization", std::string("Bearer ") + token);

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    std::size_t stop = std::min(texts.size(), start + static_cast<std::size_t>(cfg.batch_size));
    json body;
    body["model"] = cfg.model;
    body["input"] = json::array();
    for (std::size_t i = start; i < stop; ++i) body["input"].push_back(texts[i]);
    std::string payload = body.dump();

    httplib::Result res;
    int last_status = 0;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      res = client.Post(ep.path, headers, payload, "application/json");
      if (res && res->status < 500) break;
      last_status = res ? res->status : 0;
      std::this_thread::sleep_for(std::chrono::milliseconds(10 << attempt));
    }
    if (!res) throw RemoteError(0, "no response from " + cfg.endpoint);
    if (res->status != 200) throw RemoteError(res->status, res->body.substr(0, 200));
    (void)last_status;

    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("data") || !parsed["data"].is_array())
      throw RemoteError(res->status, "response is not an embedding payload");
    const json& data = parsed["data"];
    if (data.size() != stop - start)
      throw RemoteError(res->status, "response row count does not match the batch");
    for (const json& entry : data) {
      if (!entry.contains("embedding") || !entry["embedding"].is_array())
        throw RemoteError(res->status, "response entry lacks 'embedding'");
      std::vector<double> vec = entry["embedding"].get<std::vector<double>>();
      if (static_cast<int>(vec.size()) != cfg.dimension)
        throw DimensionMismatchError("remote returned dimension " +
                                     std::to_string(vec.size()) + ", expected " +
                                     std::to_string(cfg.dimension));
      for (double v : vec)
        if (!std::isfinite(v))
          throw RemoteError(res->status, "non-finite value in remote embedding");
      out.push_back(std::move(vec));
    }
  }
  return out;
}

}  // namespace

std::filesystem::path cache_path(const EmbeddingConfig& cfg) {
  std::string name = (cfg.provider == Provider::Hash ? "hash" : "remote");
  name += "_" + sanitize(cfg.model) + ".embcache";
  return std::filesystem::path(cfg.cache_dir) / name;
}

EmbeddingMatrix embed_texts(const EmbeddingConfig& cfg,
                            const std::vector<std::string>& texts, int jobs) {
  if (cfg.dimension < 2) throw ConfigError("embedding dimension must be at least 2");
  if (cfg.provider == Provider::Remote && cfg.endpoint.empty())
    throw ConfigError("remote embedding provider requires an endpoint");
  if (texts.empty()) throw ConfigError("embed_texts requires a non-empty text list");

  EmbeddingMatrix matrix;
  matrix.dimension = cfg.dimension;
  matrix.keys.reserve(texts.size());
  for (const std::string& t : texts) matrix.keys.push_back(text::sha256_hex(t));

  VectorCache cache(cfg);
  matrix.data.assign(texts.size() * static_cast<std::size_t>(cfg.dimension), 0.0);

  std::vector<std::size_t> missing;
  std::unordered_map<std::string, std::size_t> first_row;  // digest -> first missing row
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (const std::vector<double>* hit = cache.find(matrix.keys[i])) {
      std::copy(hit->begin(), hit->end(), matrix.data.begin() + i * cfg.dimension);
      continue;
    }
    auto [it, fresh] = first_row.emplace(matrix.keys[i], i);
    if (fresh) missing.push_back(i);
    else {
      // duplicate text inside one call; fill later from the first row
    }
  }

  if (!missing.empty()) {
    if (cfg.provider == Provider::Hash) {
      int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
      for (std::size_t k = 0; k < missing.size(); ++k) {
        std::size_t row = missing[k];
        std::vector<double> vec = hash_embed(texts[row], cfg.dimension);
        std::copy(vec.begin(), vec.end(), matrix.data.begin() + row * cfg.dimension);
      }
    } else {
      std::vector<std::string> batch;
      batch.reserve(missing.size());
      for (std::size_t row : missing) batch.push_back(texts[row]);
      std::vector<std::vector<double>> vecs = remote_embed(cfg, batch);
      for (std::size_t k = 0; k < missing.size(); ++k)
        std::copy(vecs[k].begin(), vecs[k].end(),
                  matrix.data.begin() + missing[k] * cfg.dimension);
    }
    // Single writer: append fresh vectors in input order.
    for (std::size_t row : missing) {
      std::vector<double> vec(matrix.data.begin() + row * cfg.dimension,
                              matrix.data.begin() + (row + 1) * cfg.dimension);
      cache.append(matrix.keys[row], vec);
    }
  }

  // Duplicate texts within the call share the first computed row.
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = first_row.find(matrix.keys[i]);
    if (it != first_row.end() && it->second != i)
      std::copy(matrix.data.begin() + it->second * cfg.dimension,
                matrix.data.begin() + (it->second + 1) * cfg.dimension,
                matrix.data.begin() + i * cfg.dimension);
  }
  return matrix;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw DimensionMismatchError("cosine operands have sizes " + std::to_string(u.size()) +
                                 " and " + std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace structeval::embed
