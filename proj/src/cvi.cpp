#include "clams/cvi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace clams {

namespace {

// Contingency table between two labelings; labels may be arbitrary ints
// (noise -1 is a cluster of its own here).
struct Contingency {
  std::vector<std::vector<long>> counts;  // r x c
  std::vector<long> row_sums, col_sums;
  long n = 0;
};

Contingency contingency(const std::vector<int>& t, const std::vector<int>& p) {
  std::map<int, int> tidx, pidx;
  for (int v : t) tidx.emplace(v, 0);
  for (int v : p) pidx.emplace(v, 0);
  int r = 0, c = 0;
  for (auto& kv : tidx) kv.second = r++;
  for (auto& kv : pidx) kv.second = c++;
  Contingency ct;
  ct.counts.assign(static_cast<std::size_t>(r), std::vector<long>(static_cast<std::size_t>(c), 0));
  ct.row_sums.assign(static_cast<std::size_t>(r), 0);
  ct.col_sums.assign(static_cast<std::size_t>(c), 0);
  ct.n = static_cast<long>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto ri = static_cast<std::size_t>(tidx[t[i]]);
    const auto ci = static_cast<std::size_t>(pidx[p[i]]);
    ++ct.counts[ri][ci];
    ++ct.row_sums[ri];
    ++ct.col_sums[ci];
  }
  return ct;
}

double entropy(const std::vector<long>& sums, long n) {
  double h = 0.0;
  for (long s : sums) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const Contingency& ct) {
  const double n = static_cast<double>(ct.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < ct.row_sums.size(); ++i) {
    for (std::size_t j = 0; j < ct.col_sums.size(); ++j) {
      const long nij = ct.counts[i][j];
      if (nij == 0) continue;
      mi += (nij / n) * std::log(n * nij / (static_cast<double>(ct.row_sums[i]) *
                                            static_cast<double>(ct.col_sums[j])));
    }
  }
  return std::max(mi, 0.0);
}

// Exact expected MI under the hypergeometric (permutation) model.
double expected_mutual_information(const Contingency& ct) {
  const long n = ct.n;
  const double logn = std::log(static_cast<double>(n));
  double emi = 0.0;
  for (long ai : ct.row_sums) {
    for (long bj : ct.col_sums) {
      const long lo = std::max<long>(1, ai + bj - n);
      const long hi = std::min(ai, bj);
      for (long nij = lo; nij <= hi; ++nij) {
        const double term1 = (static_cast<double>(nij) / n) *
                             (logn + std::log(static_cast<double>(nij)) -
                              std::log(static_cast<double>(ai)) - std::log(static_cast<double>(bj)));
        const double log_prob =
            std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(n - ai + 1.0) +
            std::lgamma(n - bj + 1.0) - std::lgamma(n + 1.0) - std::lgamma(nij + 1.0) -
            std::lgamma(ai - nij + 1.0) - std::lgamma(bj - nij + 1.0) -
            std::lgamma(n - ai - bj + nij + 1.0);
        emi += term1 * std::exp(log_prob);
      }
    }
  }
  return emi;
}

void check_lengths(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("label vectors must have equal nonzero length");
}

double comb2(long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

}  // namespace

std::string to_string(CviMetric m) {
  switch (m) {
    case CviMetric::ami: return "ami";
    case CviMetric::ari: return "ari";
    case CviMetric::silhouette: return "silhouette";
    case CviMetric::calinski_harabasz: return "calinski_harabasz";
  }
  return "?";
}

CviMetric cvi_from_string(const std::string& s) {
  if (s == "ami") return CviMetric::ami;
  if (s == "ari") return CviMetric::ari;
  if (s == "silhouette") return CviMetric::silhouette;
  if (s == "calinski_harabasz") return CviMetric::calinski_harabasz;
  throw std::invalid_argument("unknown metric: " + s);
}

bool is_external(CviMetric m) { return m == CviMetric::ami || m == CviMetric::ari; }

double ami(const std::vector<int>& labels_true, const std::vector<int>& labels_pred) {
  check_lengths(labels_true, labels_pred);
  const Contingency ct = contingency(labels_true, labels_pred);
  const double h_t = entropy(ct.row_sums, ct.n);
  const double h_p = entropy(ct.col_sums, ct.n);
  if (h_t == 0.0 && h_p == 0.0) return 1.0;
  const double mi = mutual_information(ct);
  const double emi = expected_mutual_information(ct);
  const double denom = 0.5 * (h_t + h_p) - emi;
  if (denom == 0.0) return 0.0;
  return (mi - emi) / denom;
}

double ari(const std::vector<int>& labels_true, const std::vector<int>& labels_pred) {
  check_lengths(labels_true, labels_pred);
  const Contingency ct = contingency(labels_true, labels_pred);
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < ct.row_sums.size(); ++i)
    for (std::size_t j = 0; j < ct.col_sums.size(); ++j) sum_ij += comb2(ct.counts[i][j]);
  for (long a : ct.row_sums) sum_a += comb2(a);
  for (long b : ct.col_sums) sum_b += comb2(b);
  const double total = comb2(ct.n);
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both labelings degenerate
  return (sum_ij - expected) / (max_index - expected);
}

namespace {

// Keep only non-noise rows; relabel clusters to 0..k-1.
std::pair<Matrix, std::vector<int>> drop_noise(const Matrix& X, const std::vector<int>& labels) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) keep.push_back(static_cast<Eigen::Index>(i));
  Matrix Xk(static_cast<Eigen::Index>(keep.size()), X.cols());
  std::vector<int> lk(keep.size());
  std::map<int, int> remap;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    Xk.row(static_cast<Eigen::Index>(i)) = X.row(keep[i]);
    const int orig = labels[static_cast<std::size_t>(keep[i])];
    auto it = remap.find(orig);
    if (it == remap.end()) it = remap.emplace(orig, static_cast<int>(remap.size())).first;
    lk[i] = it->second;
  }
  return {std::move(Xk), std::move(lk)};
}

}  // namespace

double silhouette(const Matrix& X, const std::vector<int>& labels_pred) {
  if (static_cast<std::size_t>(X.rows()) != labels_pred.size())
    throw std::invalid_argument("silhouette: label length mismatch");
  auto [Xk, lk] = drop_noise(X, labels_pred);
  const auto n = Xk.rows();
  int k = 0;
  for (int l : lk) k = std::max(k, l + 1);
  if (k < 2) throw UndefinedCvi("silhouette needs at least 2 clusters");

  std::vector<long> sizes(static_cast<std::size_t>(k), 0);
  for (int l : lk) ++sizes[static_cast<std::size_t>(l)];

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int li = lk[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(li)] == 1) continue;  // singleton contributes 0
    std::vector<double> mean_dist(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      mean_dist[static_cast<std::size_t>(lk[static_cast<std::size_t>(j)])] +=
          (Xk.row(i) - Xk.row(j)).norm();
    }
    const double a = mean_dist[static_cast<std::size_t>(li)] /
                     static_cast<double>(sizes[static_cast<std::size_t>(li)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == li || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, mean_dist[static_cast<std::size_t>(c)] /
                          static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;  // 0/0 := 0
  }
  return total / static_cast<double>(n);
}

double calinski_harabasz(const Matrix& X, const std::vector<int>& labels_pred) {
  if (static_cast<std::size_t>(X.rows()) != labels_pred.size())
    throw std::invalid_argument("calinski_harabasz: label length mismatch");
  auto [Xk, lk] = drop_noise(X, labels_pred);
  const auto n = Xk.rows();
  int k = 0;
  for (int l : lk) k = std::max(k, l + 1);
  if (k < 2 || n <= k) throw UndefinedCvi("calinski_harabasz needs 2 <= k < n clusters");

  const Vector global_mean = Xk.colwise().mean();
  Matrix centroids = Matrix::Zero(k, Xk.cols());
  std::vector<long> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    centroids.row(lk[static_cast<std::size_t>(i)]) += Xk.row(i);
    ++sizes[static_cast<std::size_t>(lk[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);

  double between = 0.0, within = 0.0;
  for (int c = 0; c < k; ++c)
    between += static_cast<double>(sizes[static_cast<std::size_t>(c)]) *
               (centroids.row(c) - global_mean.transpose()).squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i)
    within += (Xk.row(i) - centroids.row(lk[static_cast<std::size_t>(i)])).squaredNorm();
  if (within == 0.0) throw UndefinedCvi("calinski_harabasz undefined: zero within-dispersion");
  return (between / (k - 1)) / (within / static_cast<double>(n - k));
}

double evaluate_cvi(CviMetric m, const Matrix& X, const std::vector<int>& labels_pred,
                    const std::vector<int>* labels_true) {
  switch (m) {
    case CviMetric::ami:
      if (!labels_true) throw std::invalid_argument("ami requires ground-truth labels");
      return ami(*labels_true, labels_pred);
    case CviMetric::ari:
      if (!labels_true) throw std::invalid_argument("ari requires ground-truth labels");
      return ari(*labels_true, labels_pred);
    case CviMetric::silhouette:
      return silhouette(X, labels_pred);
    case CviMetric::calinski_harabasz:
      return calinski_harabasz(X, labels_pred);
  }
  throw std::invalid_argument("unknown metric");
}

}  // namespace clams
