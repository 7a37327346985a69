#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clams/data.hpp"

namespace clams {

// Intra-cloud geometry: squared Euclidean pairwise distances plus marginal.
struct Geometry {
  Matrix cost;     // n x n, symmetric, zero diagonal
  Vector weights;  // length n, sums to 1

  static Geometry from_point_cloud(const PointCloud& pc);
  double scale() const { return cost.mean(); }
};

struct Coupling {
  bool factored = false;
  Matrix plan;  // dense form (n x m); empty when factored
  Matrix Q;     // n x r
  Matrix R;     // m x r
  Vector g;     // r

  Matrix dense() const;
  Vector row_marginal() const;
  Vector col_marginal() const;
};

struct SinkhornResult {
  Coupling coupling;
  int iterations = 0;
  bool converged = false;
};

SinkhornResult sinkhorn(const Matrix& C, const Vector& a, const Vector& b, double epsilon,
                        int max_iter = 2000, double tol = 1e-9);

struct GwResult {
  double energy = 0.0;  // quadratic cost Q_{A,B}(P), entropy excluded
  Coupling coupling;
  int iterations = 0;
  bool converged = false;
  bool g_floored = false;
};

// Quadratic GW energy of a dense plan under squared-loss decomposition.
double gw_energy(const Geometry& ga, const Geometry& gb, const Matrix& P);
double gw_energy(const Geometry& ga, const Geometry& gb, const Coupling& P);

struct GwOptions {
  double epsilon = 0.0;  // 0 = scale-adaptive default 0.05 * mean(A)
  int max_outer = 200;
  double tol = 1e-8;
  int sinkhorn_max_iter = 2000;
  double sinkhorn_tol = 1e-9;
};

GwResult entropic_gw(const Geometry& ga, const Geometry& gb, const GwOptions& opts = {});

struct GwLrOptions {
  int rank = 6;
  double gamma = 10.0;   // mirror-descent step scale (rescaled by gradient norm)
  int max_outer = 300;
  double tol = 1e-7;
  int dykstra_max_iter = 5000;
  double dykstra_tol = 1e-11;
  double g_floor = 1e-10;
  int restarts = 3;  // seeded initializations; best energy kept
  std::uint64_t seed = 0;
};

GwResult gw_lr(const Geometry& ga, const Geometry& gb, const GwLrOptions& opts = {});

// Dataset distance through the vectorize -> ICA transform.
struct DistanceConfig {
  VectorizerConfig vectorizer;
  IcaConfig ica;
  int rank = 6;
  std::uint64_t seed = 0;
};

double point_cloud_distance(const PointCloud& a, const PointCloud& b, int rank,
                            std::uint64_t seed);
double dataset_distance(const Dataset& d1, const Dataset& d2, const DistanceConfig& cfg = {});

// Full symmetric matrix; failed pairs are NaN. Zero diagonal by convention.
Matrix pairwise_distance_matrix(const std::vector<Dataset>& suite, const DistanceConfig& cfg = {},
                                int threads = 1);

}  // namespace clams
