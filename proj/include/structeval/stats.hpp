#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "structeval/embed.hpp"

namespace structeval::stats {

enum class DistanceMetric { Euclidean, CosineDistance };

DistanceMetric metric_from_string(std::string_view s);
std::string metric_to_string(DistanceMetric m);

// Weighted-equal numeric sample set or categorical count table; the operand of
// every distance in the suite.
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_values(std::vector<double> values);
  static EmpiricalDistribution from_counts(std::map<std::string, std::uint64_t> counts);

  bool numeric() const { return numeric_; }
  const std::vector<double>& values() const { return values_; }
  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  std::size_t observations() const;

 private:
  bool numeric_ = true;
  std::vector<double> values_;  // sorted
  std::map<std::string, std::uint64_t> counts_;
};

// Exact 1-D Wasserstein-2: sqrt of the quantile-function integral, computed by
// merging the step breakpoints {i/n} and {j/m} — no resampling, sizes may
// differ.
double wasserstein2(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

// Half the L1 distance between normalized count tables, over the category
// union.
double total_variation(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

struct NeighborRadii {
  std::vector<double> radii;  // distance to the k-th nearest neighbor, self excluded
  int k = 0;
  DistanceMetric metric = DistanceMetric::Euclidean;
};

// Exact pairwise computation, parallel over points.
NeighborRadii knn_radii(const embed::EmbeddingMatrix& points, int k, DistanceMetric metric,
                        int jobs = 0);

// Fraction of query points lying inside some reference point's closed k-NN
// ball: exists r with d(q, r) <= radius(r).
double coverage_fraction(const embed::EmbeddingMatrix& queries,
                         const embed::EmbeddingMatrix& refs, const NeighborRadii& radii,
                         DistanceMetric metric, int jobs = 0);

// Naive serial implementations (full distance matrix plus sort) kept as the
// reference the parallel kernels are tested and benchmarked against.
namespace reference {
NeighborRadii knn_radii(const embed::EmbeddingMatrix& points, int k, DistanceMetric metric);
double coverage_fraction(const embed::EmbeddingMatrix& queries,
                         const embed::EmbeddingMatrix& refs, const NeighborRadii& radii,
                         DistanceMetric metric);
}  // namespace reference

}  // namespace structeval::stats
