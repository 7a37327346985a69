#pragma once

#include <cmath>
#include <vector>

#include "clams/clustering.hpp"

namespace clams::detail {

inline double minkowski(const Matrix& X, Eigen::Index i, Eigen::Index j, int p) {
  if (p == 2) return (X.row(i) - X.row(j)).norm();
  return (X.row(i) - X.row(j)).cwiseAbs().sum();
}

inline double point_distance(const Matrix& X, Eigen::Index i, Eigen::Index j,
                             DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean:
    case DistanceMetric::l2:
      return (X.row(i) - X.row(j)).norm();
    case DistanceMetric::manhattan:
    case DistanceMetric::l1:
      return (X.row(i) - X.row(j)).cwiseAbs().sum();
    case DistanceMetric::cosine: {
      const double na = X.row(i).norm(), nb = X.row(j).norm();
      if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
      return 1.0 - X.row(i).dot(X.row(j)) / (na * nb);
    }
  }
  return 0.0;
}

// Relabels non-noise clusters to 0..k-1 in first-appearance order.
inline ClusterAssignment canonicalize(std::vector<int> labels) {
  std::vector<int> remap;
  for (int& l : labels) {
    if (l < 0) {
      l = -1;
      continue;
    }
    int found = -1;
    for (std::size_t i = 0; i < remap.size(); ++i)
      if (remap[i] == l) found = static_cast<int>(i);
    if (found < 0) {
      remap.push_back(l);
      found = static_cast<int>(remap.size()) - 1;
    }
    l = found;
  }
  ClusterAssignment a;
  a.labels = std::move(labels);
  a.n_clusters_found = static_cast<int>(remap.size());
  return a;
}

inline std::vector<int> nearest_center_labels(const Matrix& X, const Matrix& centers) {
  std::vector<int> labels(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = (X.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

}  // namespace clams::detail
