#include "clams/search.hpp"

#include <chrono>
#include <cmath>

namespace clams {

std::string to_string(Preprocessor::Kind k) {
  switch (k) {
    case Preprocessor::Kind::none: return "none";
    case Preprocessor::Kind::standard_scale: return "standard_scale";
    case Preprocessor::Kind::minmax_scale: return "minmax_scale";
    case Preprocessor::Kind::pca: return "pca";
  }
  return "?";
}

Preprocessor::Kind preprocessor_from_string(const std::string& s) {
  if (s == "none") return Preprocessor::Kind::none;
  if (s == "standard_scale") return Preprocessor::Kind::standard_scale;
  if (s == "minmax_scale") return Preprocessor::Kind::minmax_scale;
  if (s == "pca") return Preprocessor::Kind::pca;
  throw std::invalid_argument("unknown preprocessor: " + s);
}

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::random: return "random";
    case Optimizer::asha: return "asha";
    case Optimizer::evolution: return "evolution";
  }
  return "?";
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "random") return Optimizer::random;
  if (s == "asha") return Optimizer::asha;
  if (s == "evolution") return Optimizer::evolution;
  throw std::invalid_argument("unknown optimizer: " + s);
}

Matrix apply_preprocessor(const Preprocessor& pre, const Matrix& X) {
  switch (pre.kind) {
    case Preprocessor::Kind::none:
      return X;
    case Preprocessor::Kind::standard_scale: {
      Matrix Y = X.rowwise() - X.colwise().mean();
      for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const double sd = std::sqrt(Y.col(j).squaredNorm() / static_cast<double>(Y.rows()));
        if (sd > 1e-12) Y.col(j) /= sd;
      }
      return Y;
    }
    case Preprocessor::Kind::minmax_scale: {
      Matrix Y = X;
      for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const double lo = Y.col(j).minCoeff(), hi = Y.col(j).maxCoeff();
        if (hi - lo > 1e-12)
          Y.col(j) = (Y.col(j).array() - lo) / (hi - lo);
        else
          Y.col(j).setZero();
      }
      return Y;
    }
    case Preprocessor::Kind::pca: {
      const int k = std::max(1, std::min<int>(pre.pca_k, static_cast<int>(X.cols())));
      Matrix Xc = X.rowwise() - X.colwise().mean();
      const Matrix cov = (Xc.transpose() * Xc) / std::max<double>(1.0, static_cast<double>(X.rows() - 1));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      Matrix W(X.cols(), k);
      for (int j = 0; j < k; ++j) W.col(j) = eig.eigenvectors().col(X.cols() - 1 - j);
      return Xc * W;
    }
  }
  return X;
}

EvalOutcome evaluate_pipeline_with_labels(const Pipeline& p, const Dataset& d, CviMetric metric,
                                          double timeout_s, ClusterAssignment* out_assignment) {
  if (is_external(metric) && !d.labels)
    return EvalError{EvalError::Kind::precondition,
                     to_string(metric) + " requires ground-truth labels"};
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const Matrix X = apply_preprocessor(p.preprocessor, d.rows);
    const ClusterAssignment asg = run_clusterer(p.clusterer, X);
    const double value =
        evaluate_cvi(metric, X, asg.labels, d.labels ? &*d.labels : nullptr);
    if (out_assignment) *out_assignment = asg;
    if (timeout_s > 0 && elapsed() > timeout_s)
      return EvalError{EvalError::Kind::timeout, "evaluation exceeded per-eval timeout"};
    return Score{metric, value};
  } catch (const ClustererError& e) {
    if (timeout_s > 0 && elapsed() > timeout_s)
      return EvalError{EvalError::Kind::timeout, "evaluation exceeded per-eval timeout"};
    return EvalError{EvalError::Kind::clusterer_failure,
                     to_string(p.clusterer.algorithm()) + ": " + e.what()};
  } catch (const UndefinedCvi& e) {
    return EvalError{EvalError::Kind::undefined_cvi, e.what()};
  }
}

EvalOutcome evaluate_pipeline(const Pipeline& p, const Dataset& d, CviMetric metric,
                              double timeout_s) {
  return evaluate_pipeline_with_labels(p, d, metric, timeout_s, nullptr);
}

namespace {

ClustererParams sample_params(Algorithm a, Rng& rng) {
  switch (a) {
    case Algorithm::kmeans: {
      KMeansParams p;
      p.n_clusters = static_cast<int>(rng.uniform_int(2, 21));
      p.max_iter = static_cast<int>(rng.uniform_int(300, 500));
      p.variant = rng.bernoulli(0.5) ? KMeansParams::Variant::lloyd : KMeansParams::Variant::elkan;
      return p;
    }
    case Algorithm::minibatch_kmeans: {
      MiniBatchKMeansParams p;
      p.n_clusters = static_cast<int>(rng.uniform_int(2, 21));
      p.max_iter = static_cast<int>(rng.uniform_int(100, 500));
      p.batch_size = static_cast<int>(rng.uniform_int(32, 1024));
      return p;
    }
    case Algorithm::mean_shift: {
      MeanShiftParams p;
      p.bin_seeding = rng.bernoulli(0.5);
      p.min_bin_freq = static_cast<int>(rng.uniform_int(1, 5));
      p.max_iter = static_cast<int>(rng.uniform_int(2, 300));
      return p;
    }
    case Algorithm::agglomerative: {
      AgglomerativeParams p;
      p.n_clusters = static_cast<int>(rng.uniform_int(2, 21));
      p.linkage = static_cast<Linkage>(rng.uniform_int(0, 3));
      if (p.linkage == Linkage::ward)
        p.metric = rng.bernoulli(0.5) ? DistanceMetric::euclidean : DistanceMetric::l2;
      else
        p.metric = static_cast<DistanceMetric>(rng.uniform_int(0, 4));
      return p;
    }
    case Algorithm::dbscan: {
      DbscanParams p;
      p.eps = rng.log_uniform(0.1, 0.5);
      p.min_samples = static_cast<int>(rng.uniform_int(3, 8));
      p.p = rng.bernoulli(0.5) ? 1 : 2;
      return p;
    }
    case Algorithm::optics: {
      OpticsParams p;
      p.min_samples = static_cast<int>(rng.uniform_int(3, 8));
      p.p = rng.bernoulli(0.5) ? 1 : 2;
      p.xi = std::min(rng.log_uniform(0.05, 5.0), 0.99);  // xi must stay below 1
      return p;
    }
    case Algorithm::birch: {
      BirchParams p;
      p.n_clusters = static_cast<int>(rng.uniform_int(2, 21));
      p.threshold = rng.uniform(0.2, 0.8);
      const int choices[] = {25, 50, 75};
      p.branching_factor = choices[rng.uniform_int(0, 2)];
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

Preprocessor sample_preprocessor(Rng& rng, int input_dims) {
  Preprocessor pre;
  pre.kind = static_cast<Preprocessor::Kind>(rng.uniform_int(0, 3));
  if (pre.kind == Preprocessor::Kind::pca)
    pre.pca_k = static_cast<int>(rng.uniform_int(1, std::max(1, std::min(10, input_dims))));
  return pre;
}

}  // namespace

Pipeline sample_pipeline(Rng& rng, int input_dims) {
  Pipeline p;
  p.preprocessor = sample_preprocessor(rng, input_dims);
  const auto algo = static_cast<Algorithm>(rng.uniform_int(0, 6));
  p.clusterer.params = sample_params(algo, rng);
  p.clusterer.seed = rng.next_u64();
  return p;
}

namespace {

// Resample a single hyperparameter until its value changes.
template <typename T, typename Sampler>
void resample_until_different(T& field, Sampler&& s) {
  const T old = field;
  for (int tries = 0; tries < 64; ++tries) {
    field = s();
    if (field != old) return;
  }
}

void mutate_one_hyperparameter(ClustererParams& params, Rng& rng) {
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KMeansParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: resample_until_different(p.n_clusters, [&] { return static_cast<int>(rng.uniform_int(2, 21)); }); break;
            case 1: resample_until_different(p.max_iter, [&] { return static_cast<int>(rng.uniform_int(300, 500)); }); break;
            default:
              p.variant = p.variant == KMeansParams::Variant::lloyd ? KMeansParams::Variant::elkan
                                                                    : KMeansParams::Variant::lloyd;
          }
        } else if constexpr (std::is_same_v<T, MiniBatchKMeansParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: resample_until_different(p.n_clusters, [&] { return static_cast<int>(rng.uniform_int(2, 21)); }); break;
            case 1: resample_until_different(p.max_iter, [&] { return static_cast<int>(rng.uniform_int(100, 500)); }); break;
            default: resample_until_different(p.batch_size, [&] { return static_cast<int>(rng.uniform_int(32, 1024)); });
          }
        } else if constexpr (std::is_same_v<T, MeanShiftParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: p.bin_seeding = !p.bin_seeding; break;
            case 1: resample_until_different(p.min_bin_freq, [&] { return static_cast<int>(rng.uniform_int(1, 5)); }); break;
            default: resample_until_different(p.max_iter, [&] { return static_cast<int>(rng.uniform_int(2, 300)); });
          }
        } else if constexpr (std::is_same_v<T, AgglomerativeParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: resample_until_different(p.n_clusters, [&] { return static_cast<int>(rng.uniform_int(2, 21)); }); break;
            case 1:
              resample_until_different(p.linkage, [&] { return static_cast<Linkage>(rng.uniform_int(0, 3)); });
              if (p.linkage == Linkage::ward && p.metric != DistanceMetric::euclidean &&
                  p.metric != DistanceMetric::l2)
                p.metric = DistanceMetric::euclidean;
              break;
            default:
              if (p.linkage == Linkage::ward)
                p.metric = p.metric == DistanceMetric::euclidean ? DistanceMetric::l2
                                                                 : DistanceMetric::euclidean;
              else
                resample_until_different(p.metric, [&] { return static_cast<DistanceMetric>(rng.uniform_int(0, 4)); });
          }
        } else if constexpr (std::is_same_v<T, DbscanParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: p.eps = rng.log_uniform(0.1, 0.5); break;
            case 1: resample_until_different(p.min_samples, [&] { return static_cast<int>(rng.uniform_int(3, 8)); }); break;
            default: p.p = p.p == 1 ? 2 : 1;
          }
        } else if constexpr (std::is_same_v<T, OpticsParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: resample_until_different(p.min_samples, [&] { return static_cast<int>(rng.uniform_int(3, 8)); }); break;
            case 1: p.p = p.p == 1 ? 2 : 1; break;
            default: p.xi = std::min(rng.log_uniform(0.05, 5.0), 0.99);
          }
        } else if constexpr (std::is_same_v<T, BirchParams>) {
          switch (rng.uniform_int(0, 2)) {
            case 0: resample_until_different(p.n_clusters, [&] { return static_cast<int>(rng.uniform_int(2, 21)); }); break;
            case 1: p.threshold = rng.uniform(0.2, 0.8); break;
            default: {
              const int choices[] = {25, 50, 75};
              resample_until_different(p.branching_factor, [&] { return choices[rng.uniform_int(0, 2)]; });
            }
          }
        }
      },
      params);
}

}  // namespace

Pipeline mutate_pipeline(const Pipeline& parent, Rng& rng, int input_dims) {
  Pipeline child = parent;
  switch (rng.uniform_int(0, 2)) {
    case 0:  // resample one hyperparameter
      mutate_one_hyperparameter(child.clusterer.params, rng);
      break;
    case 1: {  // swap algorithm, fresh hyperparameters
      Algorithm a;
      do {
        a = static_cast<Algorithm>(rng.uniform_int(0, 6));
      } while (a == parent.clusterer.algorithm());
      child.clusterer.params = sample_params(a, rng);
      break;
    }
    default: {  // swap preprocessor
      Preprocessor pre;
      do {
        pre = sample_preprocessor(rng, input_dims);
      } while (pre.kind == parent.preprocessor.kind);
      child.preprocessor = pre;
    }
  }
  return child;
}

std::pair<Pipeline, Pipeline> crossover_pipelines(const Pipeline& a, const Pipeline& b) {
  Pipeline c1{a.preprocessor, b.clusterer};
  Pipeline c2{b.preprocessor, a.clusterer};
  return {c1, c2};
}

}  // namespace clams
