#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "clams/data.hpp"

namespace clams {

enum class CviMetric { ami, ari, silhouette, calinski_harabasz };

std::string to_string(CviMetric m);
CviMetric cvi_from_string(const std::string& s);
bool is_external(CviMetric m);  // true: needs ground-truth labels

struct Score {
  CviMetric metric;
  double value = 0.0;
};

// Raised when an internal index is not defined for the given partition
// (fewer than 2 clusters, zero within-dispersion).
struct UndefinedCvi : std::runtime_error {
  explicit UndefinedCvi(const std::string& what) : std::runtime_error(what) {}
};

// External indices; noise label -1 counts as a cluster of its own.
double ami(const std::vector<int>& labels_true, const std::vector<int>& labels_pred);
double ari(const std::vector<int>& labels_true, const std::vector<int>& labels_pred);

// Internal indices; noise points (-1) are excluded.
double silhouette(const Matrix& X, const std::vector<int>& labels_pred);
double calinski_harabasz(const Matrix& X, const std::vector<int>& labels_pred);

double evaluate_cvi(CviMetric m, const Matrix& X, const std::vector<int>& labels_pred,
                    const std::vector<int>* labels_true);

}  // namespace clams
