#include <cmath>

#include "clams/ot.hpp"

namespace clams {

Geometry Geometry::from_point_cloud(const PointCloud& pc) {
  Geometry g;
  const auto n = pc.points.rows();
  g.cost.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.cost(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (pc.points.row(i) - pc.points.row(j)).squaredNorm();
      g.cost(i, j) = g.cost(j, i) = d2;
    }
  }
  g.weights = pc.weights;
  return g;
}

Matrix Coupling::dense() const {
  if (!factored) return plan;
  return Q * g.cwiseInverse().asDiagonal() * R.transpose();
}

Vector Coupling::row_marginal() const {
  if (factored) return Q.rowwise().sum();
  return plan.rowwise().sum();
}

Vector Coupling::col_marginal() const {
  if (factored) return R.rowwise().sum();
  return plan.colwise().sum().transpose();
}

namespace {

// Row-wise log-sum-exp of M + col_shift^T (broadcast).
Vector logsumexp_rows(const Matrix& M) {
  Vector out(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double mx = M.row(i).maxCoeff();
    out[i] = mx + std::log((M.row(i).array() - mx).exp().sum());
  }
  return out;
}

}  // namespace

SinkhornResult sinkhorn(const Matrix& C, const Vector& a, const Vector& b, double epsilon,
                        int max_iter, double tol) {
  if (epsilon <= 0) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  if (a.size() != C.rows() || b.size() != C.cols())
    throw std::invalid_argument("sinkhorn: marginal size mismatch");
  const auto n = C.rows();
  const auto m = C.cols();

  // Log-domain scaling: P = exp((f + g^T - C) / eps), alternate exact
  // row/column marginal fits.
  const Vector log_a = a.array().log();
  const Vector log_b = b.array().log();
  Vector f = Vector::Zero(n);
  Vector g = Vector::Zero(m);
  const Matrix K = -C / epsilon;

  SinkhornResult res;
  for (int it = 0; it < max_iter; ++it) {
    // f-update: rows hit a exactly afterwards.
    Matrix M = K;
    M.array().rowwise() += (g.transpose().array() / epsilon);
    f = epsilon * (log_a - logsumexp_rows(M));
    M = K.transpose();
    M.array().rowwise() += (f.transpose().array() / epsilon);
    g = epsilon * (log_b - logsumexp_rows(M));

    // Marginal violation of the current plan.
    Matrix logP = K;
    logP.array().colwise() += (f.array() / epsilon);
    logP.array().rowwise() += (g.transpose().array() / epsilon);
    const Matrix P = logP.array().exp();
    const double err_r = (P.rowwise().sum() - a).cwiseAbs().maxCoeff();
    const double err_c = (P.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    res.iterations = it + 1;
    if (std::max(err_r, err_c) < tol) {
      res.converged = true;
      res.coupling.plan = P;
      return res;
    }
    if (it + 1 == max_iter) res.coupling.plan = P;
  }
  res.converged = false;
  return res;
}

double gw_energy(const Geometry& ga, const Geometry& gb, const Matrix& P) {
  // Squared-loss decomposition: sum A^2 a a^T + sum B^2 b b^T - 2 <A P B, P>.
  const Vector pa = P.rowwise().sum();
  const Vector pb = P.colwise().sum().transpose();
  const double cA = pa.transpose() * (ga.cost.array().square().matrix()) * pa;
  const double cB = pb.transpose() * (gb.cost.array().square().matrix()) * pb;
  const double cross = (ga.cost * P * gb.cost).cwiseProduct(P).sum();
  return cA + cB - 2.0 * cross;
}

double gw_energy(const Geometry& ga, const Geometry& gb, const Coupling& P) {
  if (!P.factored) return gw_energy(ga, gb, P.plan);
  // Factored evaluation without materializing the dense plan:
  // cross = <A Q D R^T B, Q D R^T> with D = diag(1/g).
  const Matrix D = P.g.cwiseInverse().asDiagonal();
  const Vector pa = P.Q.rowwise().sum();
  const Vector pb = P.R.rowwise().sum();
  const double cA = pa.transpose() * (ga.cost.array().square().matrix()) * pa;
  const double cB = pb.transpose() * (gb.cost.array().square().matrix()) * pb;
  const Matrix AQD = ga.cost * P.Q * D;    // n x r
  const Matrix BRD = gb.cost * P.R * D;    // m x r
  const Matrix inner = P.Q.transpose() * AQD;   // r x r, = Q^T A Q D
  const Matrix inner2 = P.R.transpose() * BRD;  // r x r, = R^T B R D
  // cross = tr((Q^T A Q D)(R^T B R D))
  const double cross = inner.cwiseProduct(inner2.transpose()).sum();
  return cA + cB - 2.0 * cross;
}

}  // namespace clams
