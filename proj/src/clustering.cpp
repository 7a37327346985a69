#include "clams/clustering.hpp"

#include "clustering_util.hpp"

namespace clams {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::minibatch_kmeans: return "minibatch_kmeans";
    case Algorithm::mean_shift: return "mean_shift";
    case Algorithm::agglomerative: return "agglomerative";
    case Algorithm::dbscan: return "dbscan";
    case Algorithm::optics: return "optics";
    case Algorithm::birch: return "birch";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "kmeans") return Algorithm::kmeans;
  if (s == "minibatch_kmeans") return Algorithm::minibatch_kmeans;
  if (s == "mean_shift") return Algorithm::mean_shift;
  if (s == "agglomerative") return Algorithm::agglomerative;
  if (s == "dbscan") return Algorithm::dbscan;
  if (s == "optics") return Algorithm::optics;
  if (s == "birch") return Algorithm::birch;
  throw std::invalid_argument("unknown algorithm: " + s);
}

std::string to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::manhattan: return "manhattan";
    case DistanceMetric::cosine: return "cosine";
    case DistanceMetric::l1: return "l1";
    case DistanceMetric::l2: return "l2";
  }
  return "?";
}

DistanceMetric metric_from_string(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "manhattan") return DistanceMetric::manhattan;
  if (s == "cosine") return DistanceMetric::cosine;
  if (s == "l1") return DistanceMetric::l1;
  if (s == "l2") return DistanceMetric::l2;
  throw std::invalid_argument("unknown distance metric: " + s);
}

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::ward: return "ward";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    case Linkage::single: return "single";
  }
  return "?";
}

Linkage linkage_from_string(const std::string& s) {
  if (s == "ward") return Linkage::ward;
  if (s == "complete") return Linkage::complete;
  if (s == "average") return Linkage::average;
  if (s == "single") return Linkage::single;
  throw std::invalid_argument("unknown linkage: " + s);
}

ClusterAssignment run_clusterer(const ClustererConfig& cfg, const Matrix& X) {
  if (X.rows() < 2) throw ClustererError("need at least 2 rows");
  if (!X.allFinite()) throw ClustererError("input contains NaN/Inf");
  const std::uint64_t seed = cfg.seed;
  return std::visit(
      [&](const auto& p) -> ClusterAssignment {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KMeansParams>) return kmeans_fit(X, p, seed);
        else if constexpr (std::is_same_v<T, MiniBatchKMeansParams>) return minibatch_kmeans_fit(X, p, seed);
        else if constexpr (std::is_same_v<T, MeanShiftParams>) return mean_shift_fit(X, p, seed);
        else if constexpr (std::is_same_v<T, AgglomerativeParams>) return agglomerative_fit(X, p);
        else if constexpr (std::is_same_v<T, DbscanParams>) return dbscan_fit(X, p);
        else if constexpr (std::is_same_v<T, OpticsParams>) return optics_fit(X, p);
        else return birch_fit(X, p);
      },
      cfg.params);
}

}  // namespace clams
