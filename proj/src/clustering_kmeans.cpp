#include <algorithm>
#include <limits>

#include "clams/rng.hpp"
#include "clustering_util.hpp"

namespace clams {

namespace {

using detail::nearest_center_labels;

Matrix kmeanspp_init(const Matrix& X, int k, Rng& rng) {
  const auto n = X.rows();
  Matrix centers(k, X.cols());
  centers.row(0) = X.row(rng.uniform_int(0, n - 1));
  Vector d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total <= 0.0) {
      chosen = rng.uniform_int(0, n - 1);
    } else {
      double u = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0.0) {
          chosen = i;
          break;
        }
        chosen = i;
      }
    }
    centers.row(c) = X.row(chosen);
    d2 = d2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

double compute_inertia(const Matrix& X, const Matrix& centers, const std::vector<int>& labels) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    s += (X.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

// One Lloyd run from the given centers. Elkan uses triangle-inequality
// bounds to skip distance computations but visits the same fixed points,
// so both variants produce identical assignments per iteration.
struct LloydRun {
  std::vector<int> labels;
  Matrix centers;
  std::vector<double> inertia_trace;
};

void update_centers(const Matrix& X, const std::vector<int>& labels, int k, Matrix& centers) {
  const auto n = X.rows();
  Matrix sums = Matrix::Zero(k, X.cols());
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    } else {
      // Empty cluster: re-seed at the point farthest from its center.
      double best = -1.0;
      Eigen::Index arg = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d =
            (X.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > best) {
          best = d;
          arg = i;
        }
      }
      centers.row(c) = X.row(arg);
    }
  }
}

LloydRun lloyd(const Matrix& X, int k, int max_iter, Matrix centers, bool elkan) {
  const auto n = X.rows();
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> prev;

  // Elkan bookkeeping: lower bounds per (point, center), upper bound per point.
  Matrix lower;
  Vector upper;
  if (elkan) {
    lower = Matrix::Zero(n, k);
    upper = Vector::Constant(n, std::numeric_limits<double>::infinity());
  }

  for (int it = 0; it < max_iter; ++it) {
    if (elkan) {
      // Inter-center distances for pruning.
      Matrix cc(k, k);
      Vector half_nearest(k);
      for (int a = 0; a < k; ++a) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int b = 0; b < k; ++b) {
          cc(a, b) = (centers.row(a) - centers.row(b)).norm();
          if (b != a) nearest = std::min(nearest, cc(a, b));
        }
        half_nearest[a] = 0.5 * nearest;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        int best = it == 0 ? 0 : run.labels[static_cast<std::size_t>(i)];
        double du = (X.row(i) - centers.row(best)).norm();
        lower(i, best) = du;
        if (du > half_nearest[best] || it == 0) {
          for (int c = 0; c < k; ++c) {
            if (c == best) continue;
            if (it > 0 && du <= 0.5 * cc(best, c) && du <= lower(i, c)) continue;
            const double dc = (X.row(i) - centers.row(c)).norm();
            lower(i, c) = dc;
            if (dc < du) {
              du = dc;
              best = c;
            }
          }
        }
        run.labels[static_cast<std::size_t>(i)] = best;
        upper[i] = du;
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
          const double d = (X.row(i) - centers.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        run.labels[static_cast<std::size_t>(i)] = arg;
      }
    }

    run.inertia_trace.push_back(compute_inertia(X, centers, run.labels));
    if (run.labels == prev) break;
    prev = run.labels;

    const Matrix old_centers = centers;
    update_centers(X, run.labels, k, centers);
    if (elkan) {
      for (int c = 0; c < k; ++c) {
        const double shift = (centers.row(c) - old_centers.row(c)).norm();
        lower.col(c) = (lower.col(c).array() - shift).max(0.0);
      }
      for (Eigen::Index i = 0; i < n; ++i)
        upper[i] += (centers.row(run.labels[static_cast<std::size_t>(i)]) -
                     old_centers.row(run.labels[static_cast<std::size_t>(i)]))
                        .norm();
    }
  }
  run.centers = std::move(centers);
  return run;
}

}  // namespace

KMeansTrace kmeans_fit_traced(const Matrix& X, const KMeansParams& p, std::uint64_t seed) {
  const auto n = X.rows();
  if (p.n_clusters > n) throw ClustererError("kmeans: n_clusters > n");
  if (p.n_clusters < 1) throw ClustererError("kmeans: n_clusters < 1");
  Rng rng(Rng::splitmix(seed ^ 0x6b6dULL));

  LloydRun best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, p.n_init); ++restart) {
    Rng local = rng.fork(static_cast<std::uint64_t>(restart));
    Matrix init = kmeanspp_init(X, p.n_clusters, local);
    LloydRun run =
        lloyd(X, p.n_clusters, p.max_iter, std::move(init), p.variant == KMeansParams::Variant::elkan);
    const double inertia = run.inertia_trace.back();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = std::move(run);
    }
  }

  KMeansTrace trace;
  trace.assignment = detail::canonicalize(best.labels);
  trace.inertia_per_iter = best.inertia_trace;
  trace.final_inertia = best_inertia;
  return trace;
}

ClusterAssignment kmeans_fit(const Matrix& X, const KMeansParams& p, std::uint64_t seed) {
  return kmeans_fit_traced(X, p, seed).assignment;
}

ClusterAssignment minibatch_kmeans_fit(const Matrix& X, const MiniBatchKMeansParams& p,
                                       std::uint64_t seed) {
  const auto n = X.rows();
  if (p.n_clusters > n) throw ClustererError("minibatch_kmeans: n_clusters > n");
  Rng rng(Rng::splitmix(seed ^ 0x6d62ULL));
  Matrix centers = kmeanspp_init(X, p.n_clusters, rng);
  std::vector<double> counts(static_cast<std::size_t>(p.n_clusters), 0.0);
  const auto batch = static_cast<Eigen::Index>(std::min<long>(p.batch_size, n));

  for (int it = 0; it < p.max_iter; ++it) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto i = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
      double bestd = std::numeric_limits<double>::infinity();
      int c = 0;
      for (int cc = 0; cc < p.n_clusters; ++cc) {
        const double d = (X.row(i) - centers.row(cc)).squaredNorm();
        if (d < bestd) {
          bestd = d;
          c = cc;
        }
      }
      counts[static_cast<std::size_t>(c)] += 1.0;
      const double lr = 1.0 / counts[static_cast<std::size_t>(c)];
      centers.row(c) = (1.0 - lr) * centers.row(c) + lr * X.row(i);
    }
  }
  return detail::canonicalize(nearest_center_labels(X, centers));
}

}  // namespace clams
