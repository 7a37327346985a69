#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "clams/rng.hpp"
#include "clustering_util.hpp"

namespace clams {

namespace {

using detail::minkowski;

// Mean distance to the ceil(0.3*n)-th nearest neighbor over a seeded sample
// of at most 100 points.
double estimate_bandwidth(const Matrix& X, Rng& rng) {
  const auto n = X.rows();
  const auto kth = static_cast<std::size_t>(std::max<long>(1, (3 * n + 9) / 10));
  auto sample = rng.sample_without_replacement(static_cast<std::size_t>(n), 100);
  double total = 0.0;
  for (std::size_t si : sample) {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == static_cast<Eigen::Index>(si)) continue;
      dists.push_back((X.row(static_cast<Eigen::Index>(si)) - X.row(j)).norm());
    }
    const std::size_t idx = std::min(kth, dists.size()) - 1;
    std::nth_element(dists.begin(), dists.begin() + static_cast<long>(idx), dists.end());
    total += dists[idx];
  }
  return total / static_cast<double>(sample.size());
}

}  // namespace

ClusterAssignment mean_shift_fit(const Matrix& X, const MeanShiftParams& p, std::uint64_t seed) {
  const auto n = X.rows();
  Rng rng(Rng::splitmix(seed ^ 0x6d73ULL));
  double bandwidth = estimate_bandwidth(X, rng);
  if (bandwidth <= 0.0) bandwidth = 1.0;  // degenerate data: everything coincides

  // Seeds: all points, or occupied grid bins of side = bandwidth with at
  // least min_bin_freq members.
  Matrix seeds;
  if (p.bin_seeding) {
    std::map<std::vector<long>, std::pair<long, Vector>> bins;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<long> key(static_cast<std::size_t>(X.cols()));
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        key[static_cast<std::size_t>(j)] = static_cast<long>(std::floor(X(i, j) / bandwidth));
      auto it = bins.find(key);
      if (it == bins.end())
        bins.emplace(key, std::make_pair(1L, Vector(X.row(i).transpose())));
      else {
        it->second.first += 1;
        it->second.second += X.row(i).transpose();
      }
    }
    std::vector<Vector> kept;
    for (const auto& [key, cnt] : bins)
      if (cnt.first >= p.min_bin_freq) kept.push_back(cnt.second / static_cast<double>(cnt.first));
    if (kept.empty()) throw ClustererError("mean_shift: no seeds (min_bin_freq pruned all bins)");
    seeds.resize(static_cast<Eigen::Index>(kept.size()), X.cols());
    for (std::size_t i = 0; i < kept.size(); ++i)
      seeds.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
  } else {
    seeds = X;
  }

  // Flat-kernel shifts.
  const double stop = 1e-3 * bandwidth;
  std::vector<std::pair<Vector, long>> modes;  // (location, support size)
  for (Eigen::Index s = 0; s < seeds.rows(); ++s) {
    Vector center = seeds.row(s).transpose();
    long support = 0;
    for (int it = 0; it < p.max_iter; ++it) {
      Vector sum = Vector::Zero(X.cols());
      support = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((X.row(i).transpose() - center).norm() <= bandwidth) {
          sum += X.row(i).transpose();
          ++support;
        }
      }
      if (support == 0) break;
      Vector next = sum / static_cast<double>(support);
      const double shift = (next - center).norm();
      center = next;
      if (shift < stop) break;
    }
    if (support > 0) modes.emplace_back(center, support);
  }
  if (modes.empty()) throw ClustererError("mean_shift: converged to 0 clusters");

  // Merge modes within bandwidth, strongest support first.
  std::stable_sort(modes.begin(), modes.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Vector> kept_modes;
  for (const auto& [loc, sup] : modes) {
    bool dup = false;
    for (const Vector& m : kept_modes)
      if ((m - loc).norm() <= bandwidth) dup = true;
    if (!dup) kept_modes.push_back(loc);
  }
  Matrix centers(static_cast<Eigen::Index>(kept_modes.size()), X.cols());
  for (std::size_t i = 0; i < kept_modes.size(); ++i)
    centers.row(static_cast<Eigen::Index>(i)) = kept_modes[i].transpose();

  return detail::canonicalize(detail::nearest_center_labels(X, centers));
}

ClusterAssignment dbscan_fit(const Matrix& X, const DbscanParams& p) {
  if (p.eps <= 0.0 || p.min_samples < 1) throw ClustererError("dbscan: bad parameters");
  const auto n = X.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), -2);  // -2 = unvisited

  auto neighbors = [&](Eigen::Index i) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < n; ++j)
      if (minkowski(X, i, j, p.p) <= p.eps) out.push_back(j);
    return out;
  };

  int cluster = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != -2) continue;
    auto nbrs = neighbors(i);
    if (static_cast<int>(nbrs.size()) < p.min_samples) {
      labels[static_cast<std::size_t>(i)] = -1;
      continue;
    }
    labels[static_cast<std::size_t>(i)] = cluster;
    std::queue<Eigen::Index> frontier;
    for (Eigen::Index q : nbrs) frontier.push(q);
    while (!frontier.empty()) {
      const Eigen::Index q = frontier.front();
      frontier.pop();
      if (labels[static_cast<std::size_t>(q)] == -1) labels[static_cast<std::size_t>(q)] = cluster;
      if (labels[static_cast<std::size_t>(q)] != -2) continue;
      labels[static_cast<std::size_t>(q)] = cluster;
      auto qn = neighbors(q);
      if (static_cast<int>(qn.size()) >= p.min_samples)
        for (Eigen::Index r : qn) frontier.push(r);
    }
    ++cluster;
  }
  return detail::canonicalize(std::move(labels));
}

namespace {

struct OpticsOrdering {
  std::vector<Eigen::Index> order;
  std::vector<double> reachability;  // per ordering position; inf = undefined
};

OpticsOrdering optics_order(const Matrix& X, int min_samples, int p) {
  const auto n = X.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> core_dist(static_cast<std::size_t>(n), kInf);
  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) D(i, j) = minkowski(X, i, j, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = D(i, j);
    if (min_samples <= n) {
      std::nth_element(row.begin(), row.begin() + (min_samples - 1), row.end());
      core_dist[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(min_samples - 1)];
    }
  }

  std::vector<bool> processed(static_cast<std::size_t>(n), false);
  std::vector<double> reach(static_cast<std::size_t>(n), kInf);
  OpticsOrdering out;
  out.order.reserve(static_cast<std::size_t>(n));
  out.reachability.reserve(static_cast<std::size_t>(n));

  for (Eigen::Index start = 0; start < n; ++start) {
    if (processed[static_cast<std::size_t>(start)]) continue;
    // Expand one connected component from `start` via min-reachability.
    Eigen::Index current = start;
    reach[static_cast<std::size_t>(current)] = kInf;
    while (true) {
      processed[static_cast<std::size_t>(current)] = true;
      out.order.push_back(current);
      out.reachability.push_back(reach[static_cast<std::size_t>(current)]);
      if (std::isfinite(core_dist[static_cast<std::size_t>(current)])) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (processed[static_cast<std::size_t>(j)]) continue;
          const double rd = std::max(core_dist[static_cast<std::size_t>(current)], D(current, j));
          reach[static_cast<std::size_t>(j)] = std::min(reach[static_cast<std::size_t>(j)], rd);
        }
      }
      // Next unprocessed point with smallest reachability in this component.
      double best = kInf;
      Eigen::Index next = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (processed[static_cast<std::size_t>(j)]) continue;
        if (reach[static_cast<std::size_t>(j)] < best) {
          best = reach[static_cast<std::size_t>(j)];
          next = j;
        }
      }
      if (next < 0) break;  // component exhausted; outer loop finds next start
      current = next;
    }
  }
  return out;
}

}  // namespace

ClusterAssignment optics_fit(const Matrix& X, const OpticsParams& p) {
  if (p.min_samples < 2) throw ClustererError("optics: min_samples < 2");
  const double xi = std::clamp(p.xi, 0.0, 0.999999);
  const auto n = X.rows();
  const OpticsOrdering ord = optics_order(X, p.min_samples, p.p);
  const std::size_t m = ord.reachability.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double xi_c = 1.0 - xi;

  // Reachability plot with a sentinel inf appended; ratios against inf mark
  // the plot boundaries as maximally steep, inf/inf marks neither direction.
  std::vector<double> rp(ord.reachability);
  rp.push_back(kInf);

  std::vector<char> steep_up(m, 0), steep_down(m, 0), up(m, 0), down(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const double ratio = rp[j] / rp[j + 1];
    if (ratio <= xi_c) steep_up[j] = 1;
    if (ratio >= 1.0 / xi_c) steep_down[j] = 1;
    if (ratio < 1.0) up[j] = 1;
    if (ratio > 1.0) down[j] = 1;
  }

  // Maximal steep area from `start`: tolerate up to min_samples consecutive
  // non-steep points in the same direction, stop at the first reversal.
  const auto extend_region = [&](const std::vector<char>& steep, const std::vector<char>& xward,
                                 std::size_t start) {
    std::size_t idx = start, end = start;
    int non_xward = 0;
    while (idx < m) {
      if (steep[idx]) {
        non_xward = 0;
        end = idx;
      } else if (!xward[idx]) {
        if (++non_xward > p.min_samples) break;
      } else {
        return end;
      }
      ++idx;
    }
    return end;
  };

  struct Sda {
    std::size_t start, end;
    double mib;  // max reachability seen since the area was discovered
  };
  std::vector<Sda> sdas;
  const auto filter_sdas = [&](double mib_val) {
    if (std::isinf(mib_val)) {
      sdas.clear();
      return;
    }
    std::vector<Sda> kept;
    for (Sda& s : sdas)
      if (mib_val <= rp[s.start] * xi_c) {
        s.mib = std::max(s.mib, mib_val);
        kept.push_back(s);
      }
    sdas = std::move(kept);
  };

  std::vector<std::pair<std::size_t, std::size_t>> clusters;
  const auto min_cluster = static_cast<std::size_t>(std::max(2, p.min_samples));
  std::size_t index = 0;
  double mib = 0.0;
  for (std::size_t si = 0; si < m; ++si) {
    if (!(steep_up[si] || steep_down[si])) continue;
    if (si < index) continue;  // inside an already-consumed area
    for (std::size_t j = index; j <= si; ++j) mib = std::max(mib, rp[j]);

    if (steep_down[si]) {
      filter_sdas(mib);
      const std::size_t d_end = extend_region(steep_down, up, si);
      sdas.push_back({si, d_end, 0.0});
      index = d_end + 1;
      mib = rp[index];
      continue;
    }

    filter_sdas(mib);
    const std::size_t u_start = si;
    const std::size_t u_end = extend_region(steep_up, down, u_start);
    index = u_end + 1;
    mib = rp[index];

    std::vector<std::pair<std::size_t, std::size_t>> u_clusters;
    for (const Sda& d : sdas) {
      std::size_t c_start = d.start;
      std::size_t c_end = u_end;
      // the up area must climb xi-significantly above everything in between
      if (rp[c_end + 1] * xi_c < d.mib) continue;
      const double d_max = rp[d.start];
      if (d_max * xi_c >= rp[c_end + 1]) {
        // trim the start down to the level the cluster ends at
        while (rp[c_start + 1] > rp[c_end + 1] && c_start < d.end) ++c_start;
      } else if (rp[c_end + 1] * xi_c >= d_max) {
        // trim the end down to the level the cluster starts at
        while (c_end > u_start && rp[c_end - 1] > d_max) --c_end;
      }
      if (c_end - c_start + 1 < min_cluster) continue;
      if (c_start > d.end) continue;
      if (c_end < u_start) continue;
      u_clusters.emplace_back(c_start, c_end);
    }
    // innermost (smallest) clusters first so they win the labeling below
    clusters.insert(clusters.end(), u_clusters.rbegin(), u_clusters.rend());
  }

  // A span gets a label only if it is entirely unlabeled, so nested clusters
  // discovered earlier take precedence over their enclosing ones.
  std::vector<int> pos_labels(m, -1);
  int next_label = 0;
  for (const auto& [s, e] : clusters) {
    bool untouched = true;
    for (std::size_t j = s; j <= e; ++j)
      if (pos_labels[j] != -1) {
        untouched = false;
        break;
      }
    if (!untouched) continue;
    for (std::size_t j = s; j <= e; ++j) pos_labels[j] = next_label;
    ++next_label;
  }
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (std::size_t j = 0; j < m; ++j)
    labels[static_cast<std::size_t>(ord.order[j])] = pos_labels[j];
  return detail::canonicalize(std::move(labels));
}

}  // namespace clams
