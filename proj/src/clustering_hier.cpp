#include <algorithm>
#include <limits>
#include <memory>

#include "clustering_util.hpp"

namespace clams {

namespace {

using detail::point_distance;

// Lance-Williams agglomeration over a full distance matrix with cached
// per-row nearest neighbours. Ward distances are kept in squared form.
std::vector<int> lance_williams(const Matrix& X, int k, DistanceMetric metric, Linkage linkage) {
  const auto n = X.rows();
  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = point_distance(X, i, j, metric);
      if (linkage == Linkage::ward) d = d * d;
      D(i, j) = D(j, i) = d;
    }
  }

  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<long> sizes(static_cast<std::size_t>(n), 1);
  std::vector<int> membership(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) membership[static_cast<std::size_t>(i)] = static_cast<int>(i);

  auto row_nearest = [&](Eigen::Index i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i || !active[static_cast<std::size_t>(j)]) continue;
      if (D(i, j) < best) {
        best = D(i, j);
        arg = j;
      }
    }
    return std::make_pair(best, arg);
  };

  std::vector<std::pair<double, Eigen::Index>> nearest(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) nearest[static_cast<std::size_t>(i)] = row_nearest(i);

  int remaining = static_cast<int>(n);
  while (remaining > k) {
    // Global closest active pair via cached row minima.
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index a = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      if (nearest[static_cast<std::size_t>(i)].first < best) {
        best = nearest[static_cast<std::size_t>(i)].first;
        a = i;
      }
    }
    const Eigen::Index b = nearest[static_cast<std::size_t>(a)].second;
    const double n_a = static_cast<double>(sizes[static_cast<std::size_t>(a)]);
    const double n_b = static_cast<double>(sizes[static_cast<std::size_t>(b)]);

    // Merge b into a.
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)] || j == a || j == b) continue;
      double d;
      switch (linkage) {
        case Linkage::single:
          d = std::min(D(a, j), D(b, j));
          break;
        case Linkage::complete:
          d = std::max(D(a, j), D(b, j));
          break;
        case Linkage::average:
          d = (n_a * D(a, j) + n_b * D(b, j)) / (n_a + n_b);
          break;
        case Linkage::ward: {
          const double n_j = static_cast<double>(sizes[static_cast<std::size_t>(j)]);
          d = ((n_a + n_j) * D(a, j) + (n_b + n_j) * D(b, j) - n_j * D(a, b)) / (n_a + n_b + n_j);
          break;
        }
      }
      D(a, j) = D(j, a) = d;
    }
    sizes[static_cast<std::size_t>(a)] += sizes[static_cast<std::size_t>(b)];
    active[static_cast<std::size_t>(b)] = false;
    for (int& mlabel : membership)
      if (mlabel == static_cast<int>(b)) mlabel = static_cast<int>(a);
    --remaining;

    // Refresh stale caches: any row whose nearest pointed at a or b, plus a.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      auto& nn = nearest[static_cast<std::size_t>(i)];
      if (i == a || nn.second == a || nn.second == b || D(i, a) < nn.first)
        nn = row_nearest(i);
    }
  }
  return membership;
}

}  // namespace

ClusterAssignment agglomerative_fit(const Matrix& X, const AgglomerativeParams& p) {
  const auto n = X.rows();
  if (p.n_clusters < 1 || p.n_clusters > n)
    throw ClustererError("agglomerative: need 1 <= n_clusters <= n");
  if (p.linkage == Linkage::ward && p.metric != DistanceMetric::euclidean &&
      p.metric != DistanceMetric::l2)
    throw ClustererError("agglomerative: ward linkage requires euclidean metric");
  return detail::canonicalize(lance_williams(X, p.n_clusters, p.metric, p.linkage));
}

namespace {

// CF-tree subcluster: count, linear sum, squared-norm sum.
struct CfEntry {
  long count = 0;
  Vector ls;
  double ss = 0.0;

  Vector centroid() const { return ls / static_cast<double>(count); }
  // RMS radius of the subcluster after (hypothetically) merging a point in.
  double radius() const {
    const double c = static_cast<double>(count);
    const double r2 = ss / c - (ls / c).squaredNorm();
    return std::sqrt(std::max(r2, 0.0));
  }
  void add(const Vector& x) {
    if (count == 0) ls = Vector::Zero(x.size());
    ++count;
    ls += x;
    ss += x.squaredNorm();
  }
  void merge(const CfEntry& o) {
    if (count == 0) ls = Vector::Zero(o.ls.size());
    count += o.count;
    ls += o.ls;
    ss += o.ss;
  }
};

struct CfNode {
  bool leaf = true;
  std::vector<CfEntry> entries;                  // summaries of children / subclusters
  std::vector<std::unique_ptr<CfNode>> children;  // empty for leaves
};

std::size_t closest_entry(const CfNode& node, const Vector& x) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < node.entries.size(); ++i) {
    const double d = (node.entries[i].centroid() - x).squaredNorm();
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  return arg;
}

// Splits an over-full node into two by farthest-pair seeding.
std::pair<std::unique_ptr<CfNode>, std::unique_ptr<CfNode>> split_node(CfNode& node) {
  const std::size_t m = node.entries.size();
  double far_best = -1.0;
  std::size_t s1 = 0, s2 = 1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = (node.entries[i].centroid() - node.entries[j].centroid()).squaredNorm();
      if (d > far_best) {
        far_best = d;
        s1 = i;
        s2 = j;
      }
    }
  auto left = std::make_unique<CfNode>();
  auto right = std::make_unique<CfNode>();
  left->leaf = right->leaf = node.leaf;
  for (std::size_t i = 0; i < m; ++i) {
    const double d1 = (node.entries[i].centroid() - node.entries[s1].centroid()).squaredNorm();
    const double d2 = (node.entries[i].centroid() - node.entries[s2].centroid()).squaredNorm();
    CfNode& dst = (d1 <= d2) ? *left : *right;
    dst.entries.push_back(node.entries[i]);
    if (!node.leaf) dst.children.push_back(std::move(node.children[i]));
  }
  return {std::move(left), std::move(right)};
}

CfEntry summarize(const CfNode& node) {
  CfEntry e;
  for (const CfEntry& c : node.entries) e.merge(c);
  return e;
}

// Returns true if the child split and out_* carry the replacement pair.
bool insert_point(CfNode& node, const Vector& x, double threshold, int branching,
                  std::unique_ptr<CfNode>& out_left, std::unique_ptr<CfNode>& out_right) {
  if (node.leaf) {
    if (!node.entries.empty()) {
      const std::size_t j = closest_entry(node, x);
      CfEntry trial = node.entries[j];
      trial.add(x);
      if (trial.radius() <= threshold) {
        node.entries[j] = trial;
        return false;
      }
    }
    CfEntry fresh;
    fresh.add(x);
    node.entries.push_back(fresh);
  } else {
    const std::size_t j = closest_entry(node, x);
    std::unique_ptr<CfNode> l, rgt;
    const bool split = insert_point(*node.children[j], x, threshold, branching, l, rgt);
    if (!split) {
      node.entries[j].add(x);
    } else {
      node.entries[j] = summarize(*l);
      node.children[j] = std::move(l);
      node.entries.push_back(summarize(*rgt));
      node.children.push_back(std::move(rgt));
    }
  }
  if (static_cast<int>(node.entries.size()) > branching) {
    auto [l, rgt] = split_node(node);
    out_left = std::move(l);
    out_right = std::move(rgt);
    return true;
  }
  return false;
}

void collect_leaf_entries(const CfNode& node, std::vector<CfEntry>& out) {
  if (node.leaf) {
    out.insert(out.end(), node.entries.begin(), node.entries.end());
    return;
  }
  for (const auto& c : node.children) collect_leaf_entries(*c, out);
}

}  // namespace

ClusterAssignment birch_fit(const Matrix& X, const BirchParams& p) {
  const auto n = X.rows();
  if (p.n_clusters < 1 || p.n_clusters > n) throw ClustererError("birch: need 1 <= n_clusters <= n");
  if (p.threshold <= 0.0 || p.branching_factor < 2) throw ClustererError("birch: bad parameters");

  auto root = std::make_unique<CfNode>();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::unique_ptr<CfNode> l, r;
    if (insert_point(*root, Vector(X.row(i).transpose()), p.threshold, p.branching_factor, l, r)) {
      auto new_root = std::make_unique<CfNode>();
      new_root->leaf = false;
      new_root->entries.push_back(summarize(*l));
      new_root->entries.push_back(summarize(*r));
      new_root->children.push_back(std::move(l));
      new_root->children.push_back(std::move(r));
      root = std::move(new_root);
    }
  }

  std::vector<CfEntry> leaves;
  collect_leaf_entries(*root, leaves);
  Matrix centroids(static_cast<Eigen::Index>(leaves.size()), X.cols());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    centroids.row(static_cast<Eigen::Index>(i)) = leaves[i].centroid().transpose();

  // Global step: ward-cluster the subcluster centroids down to k.
  std::vector<int> leaf_label(leaves.size());
  const int k_eff = std::min<int>(p.n_clusters, static_cast<int>(leaves.size()));
  if (k_eff == static_cast<int>(leaves.size())) {
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_label[i] = static_cast<int>(i);
  } else {
    AgglomerativeParams ap;
    ap.n_clusters = k_eff;
    ap.metric = DistanceMetric::euclidean;
    ap.linkage = Linkage::ward;
    leaf_label = agglomerative_fit(centroids, ap).labels;
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < leaves.size(); ++c) {
      const double d = (X.row(i).transpose() - leaves[c].centroid()).squaredNorm();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = leaf_label[arg];
  }
  return detail::canonicalize(std::move(labels));
}

}  // namespace clams
