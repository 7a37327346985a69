#include <cmath>
#include <limits>
#include <vector>

#include "clams/ot.hpp"
#include "clams/rng.hpp"

namespace clams {

namespace {

double default_epsilon(const Geometry& ga) { return 0.05 * ga.scale(); }

}  // namespace

GwResult entropic_gw(const Geometry& ga, const Geometry& gb, const GwOptions& opts) {
  const Vector& a = ga.weights;
  const Vector& b = gb.weights;
  const double eps = opts.epsilon > 0 ? opts.epsilon : default_epsilon(ga);

  // Constant part of the linearized cost (marginals are fixed on the
  // feasible set): cA_i = sum_k A_ik^2 a_k, cB_j = sum_k B_jk^2 b_k.
  const Vector cA = ga.cost.array().square().matrix() * a;
  const Vector cB = gb.cost.array().square().matrix() * b;

  Matrix P = a * b.transpose();  // product coupling init
  double energy = gw_energy(ga, gb, P);

  // anneal epsilon from a coarse level down to the target; the objective is
  // non-convex and starting smooth avoids shallow local minima
  std::vector<double> levels;
  for (double e = eps * 32.0; e > eps * 1.5; e *= 0.5) levels.push_back(e);
  levels.push_back(eps);

  GwResult res;
  res.converged = false;
  for (const double level : levels) {
    res.converged = false;
    for (int it = 0; it < opts.max_outer; ++it) {
      Matrix C = -2.0 * (ga.cost * P * gb.cost);
      C.colwise() += cA;
      C.rowwise() += cB.transpose();
      if (!C.allFinite()) throw std::runtime_error("entropic_gw: numerical overflow");

      SinkhornResult inner = sinkhorn(C, a, b, level, opts.sinkhorn_max_iter, opts.sinkhorn_tol);
      if (inner.coupling.plan.size() == 0) break;  // sinkhorn made no usable plan
      P = inner.coupling.plan;
      const double new_energy = gw_energy(ga, gb, P);
      ++res.iterations;
      if (std::abs(new_energy - energy) < opts.tol) {
        energy = new_energy;
        res.converged = true;
        break;
      }
      energy = new_energy;
    }
  }
  res.energy = std::max(energy, 0.0);
  res.coupling.plan = std::move(P);
  return res;
}

namespace {

// Dykstra projection onto the factored-coupling set
//   { (Q, R, g): Q 1 = a, R 1 = b, Q^T 1 = g, R^T 1 = g, sum g = 1 }
// given elementwise-positive kernels (K1, K2, k3).
bool lr_dykstra(const Matrix& K1, const Matrix& K2, const Vector& k3, const Vector& a,
                const Vector& b, double alpha, int max_iter, double tol, Matrix& Q, Matrix& R,
                Vector& g) {
  const auto r = k3.size();
  Vector u1 = Vector::Ones(K1.rows()), u2 = Vector::Ones(K2.rows());
  Vector v1 = Vector::Ones(r), v2 = Vector::Ones(r);
  Vector v1_prev = v1, v2_prev = v2;
  Vector q1 = Vector::Ones(r), q2 = Vector::Ones(r);
  Vector q3_1 = Vector::Ones(r), q3_2 = Vector::Ones(r);
  Vector g_prev = k3;

  bool converged = false;
  double last_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    u1 = a.cwiseQuotient(K1 * v1);
    u2 = b.cwiseQuotient(K2 * v2);

    g = (g_prev.cwiseProduct(q3_1)).cwiseMax(alpha);
    q3_1 = g_prev.cwiseProduct(q3_1).cwiseQuotient(g);
    g_prev = g;

    const Vector t1 = K1.transpose() * u1;
    const Vector t2 = K2.transpose() * u2;
    const Vector prod1 = v1_prev.cwiseProduct(q1).cwiseProduct(t1);
    const Vector prod2 = v2_prev.cwiseProduct(q2).cwiseProduct(t2);
    g = (g_prev.cwiseProduct(q3_2).cwiseProduct(prod1).cwiseProduct(prod2)).array().pow(1.0 / 3.0);
    v1 = g.cwiseQuotient(t1);
    v2 = g.cwiseQuotient(t2);
    q1 = v1_prev.cwiseProduct(q1).cwiseQuotient(v1);
    q2 = v2_prev.cwiseProduct(q2).cwiseQuotient(v2);
    q3_2 = g_prev.cwiseProduct(q3_2).cwiseQuotient(g);
    v1_prev = v1;
    v2_prev = v2;
    g_prev = g;

    const double err1 = (u1.cwiseProduct(K1 * v1) - a).cwiseAbs().sum();
    const double err2 = (u2.cwiseProduct(K2 * v2) - b).cwiseAbs().sum();
    if (err1 + err2 < tol) {
      converged = true;
      break;
    }
    last_err = err1 + err2;
    if (!g.allFinite()) return false;
  }
  // Accept a near-feasible projection: the outer loop only needs marginals
  // accurate to ~1e-4, far looser than the stopping tolerance.
  if (!converged && last_err < 1e6 * tol) converged = true;
  Q = u1.asDiagonal() * K1 * v1.asDiagonal();
  R = u2.asDiagonal() * K2 * v2.asDiagonal();
  return converged && Q.allFinite() && R.allFinite();
}

struct LrState {
  Matrix Q, R;
  Vector g;
};

// One full GW-LR solve from a given initialization.
GwResult gw_lr_from_init(const Geometry& ga, const Geometry& gb, const GwLrOptions& opts,
                         LrState s) {
  const Vector& a = ga.weights;
  const Vector& b = gb.weights;
  const Matrix A2 = ga.cost.array().square().matrix();
  const Matrix B2 = gb.cost.array().square().matrix();
  const Vector cA = A2 * a;
  const Vector cB = B2 * b;

  GwResult res;
  Coupling cur;
  cur.factored = true;
  cur.Q = s.Q;
  cur.R = s.R;
  cur.g = s.g;
  double energy = gw_energy(ga, gb, cur);
  bool g_floored = false;

  for (int it = 0; it < opts.max_outer; ++it) {
    const Matrix D = s.g.cwiseInverse().asDiagonal();
    // grad_P = cA 1^T + 1 cB^T - 4 A P B   (up to the constant-marginal parts)
    const Matrix APB_R = ga.cost * s.Q * D * (s.R.transpose() * gb.cost);  // n x m implicit: A P B
    // grad wrt factors:
    Matrix gQ = APB_R * s.R * D;  // n x r
    gQ = -4.0 * gQ;
    gQ.colwise() += 2.0 * cA;
    Matrix gR = APB_R.transpose() * s.Q * D;  // m x r
    gR = -4.0 * gR;
    gR.colwise() += 2.0 * cB;
    const Matrix mid = s.Q.transpose() * APB_R * s.R;  // r x r
    Vector gg(s.g.size());
    for (Eigen::Index k = 0; k < s.g.size(); ++k) gg[k] = 4.0 * mid(k, k) / (s.g[k] * s.g[k]);

    // Rescaled mirror step.
    const double norm = std::max({gQ.cwiseAbs().maxCoeff(), gR.cwiseAbs().maxCoeff(),
                                  gg.cwiseAbs().maxCoeff(), 1e-12});
    const double gamma = opts.gamma / norm;

    const Matrix K1 = (s.Q.array().max(1e-300).log() - gamma * gQ.array()).exp();
    const Matrix K2 = (s.R.array().max(1e-300).log() - gamma * gR.array()).exp();
    const Vector k3 = (s.g.array().max(1e-300).log() - gamma * gg.array()).exp();
    if (!K1.allFinite() || !K2.allFinite() || !k3.allFinite())
      throw std::runtime_error("gw_lr: numerical overflow in mirror step");

    Matrix Qn, Rn;
    Vector gn;
    if (!lr_dykstra(K1, K2, k3, a, b, opts.g_floor, opts.dykstra_max_iter, opts.dykstra_tol, Qn,
                    Rn, gn)) {
      break;  // projection failed to converge; keep best iterate so far
    }
    if ((gn.array() <= opts.g_floor * 1.000001).any()) g_floored = true;
    s.Q = Qn;
    s.R = Rn;
    s.g = gn;

    cur.Q = s.Q;
    cur.R = s.R;
    cur.g = s.g;
    const double new_energy = gw_energy(ga, gb, cur);
    res.iterations = it + 1;
    if (std::abs(new_energy - energy) < opts.tol * std::max(1.0, std::abs(energy))) {
      energy = new_energy;
      res.converged = true;
      break;
    }
    energy = new_energy;
  }

  res.energy = std::max(energy, 0.0);
  res.coupling.factored = true;
  res.coupling.Q = s.Q;
  res.coupling.R = s.R;
  res.coupling.g = s.g;
  res.g_floored = g_floored;
  return res;
}

LrState lr_init(const Vector& a, const Vector& b, int rank, Rng& rng) {
  const auto r = static_cast<Eigen::Index>(rank);
  LrState s;
  s.g = Vector::Constant(r, 1.0 / static_cast<double>(r));
  // Rank-r multiplicative perturbation of the product coupling a g^T / b g^T.
  s.Q = a * s.g.transpose();
  s.R = b * s.g.transpose();
  for (Eigen::Index i = 0; i < s.Q.rows(); ++i)
    for (Eigen::Index k = 0; k < r; ++k) s.Q(i, k) *= std::exp(0.5 * rng.normal());
  for (Eigen::Index j = 0; j < s.R.rows(); ++j)
    for (Eigen::Index k = 0; k < r; ++k) s.R(j, k) *= std::exp(0.5 * rng.normal());
  // Rough renormalization toward the constraint set; Dykstra finishes the job.
  s.Q.array().colwise() *= (a.array() / s.Q.rowwise().sum().array());
  s.R.array().colwise() *= (b.array() / s.R.rowwise().sum().array());
  return s;
}

}  // namespace

GwResult gw_lr(const Geometry& ga, const Geometry& gb, const GwLrOptions& opts) {
  const auto n = ga.weights.size();
  const auto m = gb.weights.size();
  const int rank = std::min<int>(opts.rank, static_cast<int>(std::min(n, m)));
  if (rank < 1) throw std::invalid_argument("gw_lr: rank must be >= 1");

  // Solve on cost matrices divided by a common scale so gradient magnitudes
  // (and with them the rescaled mirror step and the convergence test) do not
  // depend on the data's units; energy scales back by scale^2.
  const double scale = std::max({ga.cost.mean(), gb.cost.mean(), 1e-300});
  Geometry gan{ga.cost / scale, ga.weights};
  Geometry gbn{gb.cost / scale, gb.weights};

  Rng rng(Rng::splitmix(opts.seed ^ 0x6c72ULL));
  GwResult best;
  bool have = false;
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Rng local = rng.fork(static_cast<std::uint64_t>(restart));
    GwLrOptions o = opts;
    o.rank = rank;
    GwResult r = gw_lr_from_init(gan, gbn, o, lr_init(ga.weights, gb.weights, rank, local));
    if (!have || r.energy < best.energy) {
      best = std::move(r);
      have = true;
    }
  }
  best.energy *= scale * scale;
  return best;
}

}  // namespace clams
