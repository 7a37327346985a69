#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "clams/data.hpp"

namespace clams {

// Raised when an algorithm cannot produce a clustering on the given input
// (e.g. mean shift prunes every seed). The search layer maps this to a
// worst-possible fitness; it is never a crash.
struct ClustererError : std::runtime_error {
  explicit ClustererError(const std::string& what) : std::runtime_error(what) {}
};

struct ClusterAssignment {
  std::vector<int> labels;  // -1 = noise (dbscan/optics)
  int n_clusters_found = 0;
};

enum class DistanceMetric { euclidean, manhattan, cosine, l1, l2 };
enum class Linkage { ward, complete, average, single };

struct KMeansParams {
  int n_clusters = 8;
  int max_iter = 300;
  enum class Variant { lloyd, elkan } variant = Variant::lloyd;
  int n_init = 10;
};

struct MiniBatchKMeansParams {
  int n_clusters = 8;
  int max_iter = 100;
  int batch_size = 256;
};

struct MeanShiftParams {
  bool bin_seeding = false;
  int min_bin_freq = 1;
  int max_iter = 300;
};

struct AgglomerativeParams {
  int n_clusters = 2;
  DistanceMetric metric = DistanceMetric::euclidean;
  Linkage linkage = Linkage::ward;
};

struct DbscanParams {
  double eps = 0.5;
  int min_samples = 5;
  int p = 2;  // Minkowski order, 1 or 2
};

struct OpticsParams {
  int min_samples = 5;
  int p = 2;
  double xi = 0.05;
};

struct BirchParams {
  int n_clusters = 3;
  double threshold = 0.5;
  int branching_factor = 50;
};

using ClustererParams =
    std::variant<KMeansParams, MiniBatchKMeansParams, MeanShiftParams, AgglomerativeParams,
                 DbscanParams, OpticsParams, BirchParams>;

enum class Algorithm { kmeans, minibatch_kmeans, mean_shift, agglomerative, dbscan, optics, birch };

struct ClustererConfig {
  ClustererParams params;
  std::uint64_t seed = 0;

  Algorithm algorithm() const { return static_cast<Algorithm>(params.index()); }
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
std::string to_string(DistanceMetric m);
DistanceMetric metric_from_string(const std::string& s);
std::string to_string(Linkage l);
Linkage linkage_from_string(const std::string& s);

ClusterAssignment run_clusterer(const ClustererConfig& cfg, const Matrix& X);

ClusterAssignment kmeans_fit(const Matrix& X, const KMeansParams& p, std::uint64_t seed);
ClusterAssignment minibatch_kmeans_fit(const Matrix& X, const MiniBatchKMeansParams& p,
                                       std::uint64_t seed);
ClusterAssignment mean_shift_fit(const Matrix& X, const MeanShiftParams& p, std::uint64_t seed);
ClusterAssignment agglomerative_fit(const Matrix& X, const AgglomerativeParams& p);
ClusterAssignment dbscan_fit(const Matrix& X, const DbscanParams& p);
ClusterAssignment optics_fit(const Matrix& X, const OpticsParams& p);
ClusterAssignment birch_fit(const Matrix& X, const BirchParams& p);

// Lloyd iterations expose their inertia trace for monotonicity checks.
struct KMeansTrace {
  ClusterAssignment assignment;
  std::vector<double> inertia_per_iter;
  double final_inertia = 0.0;
};
KMeansTrace kmeans_fit_traced(const Matrix& X, const KMeansParams& p, std::uint64_t seed);

}  // namespace clams
