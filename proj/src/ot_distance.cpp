#include <cmath>

#include "clams/ot.hpp"
#include "clams/parallel.hpp"

namespace clams {

double point_cloud_distance(const PointCloud& a, const PointCloud& b, int rank,
                            std::uint64_t seed) {
  Geometry ga = Geometry::from_point_cloud(a);
  Geometry gb = Geometry::from_point_cloud(b);
  // the energy is symmetric in its arguments but the seeded initialization is
  // not; solve in a canonical order so distance(a, b) == distance(b, a)
  const auto key = [](const Geometry& g) {
    return std::make_pair(g.cost.rows(), g.cost.sum());
  };
  if (key(ga) > key(gb)) std::swap(ga, gb);
  GwLrOptions opts;
  opts.rank = rank;
  opts.seed = seed;
  return gw_lr(ga, gb, opts).energy;
}

namespace {

PointCloud phi(const Dataset& d, const DistanceConfig& cfg) {
  const Dataset v = d.vectorized ? d : vectorize(d, cfg.vectorizer);
  IcaConfig ica = cfg.ica;
  ica.seed = cfg.seed;
  return ica_transform(v, ica);
}

}  // namespace

double dataset_distance(const Dataset& d1, const Dataset& d2, const DistanceConfig& cfg) {
  return point_cloud_distance(phi(d1, cfg), phi(d2, cfg), cfg.rank, cfg.seed);
}

Matrix pairwise_distance_matrix(const std::vector<Dataset>& suite, const DistanceConfig& cfg,
                                int threads) {
  const auto n = suite.size();
  if (n < 2) throw std::invalid_argument("pairwise_distance_matrix: need at least 2 datasets");

  std::vector<PointCloud> clouds(n);
  std::vector<bool> cloud_ok(n, false);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      clouds[i] = phi(suite[i], cfg);
      cloud_ok[i] = true;
    } catch (const std::exception&) {
      cloud_ok[i] = false;
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  Matrix D = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    double v = std::numeric_limits<double>::quiet_NaN();
    if (cloud_ok[i] && cloud_ok[j]) {
      try {
        v = point_cloud_distance(clouds[i], clouds[j], cfg.rank, cfg.seed);
      } catch (const std::exception&) {
      }
    }
    D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  });
  return D;
}

}  // namespace clams
