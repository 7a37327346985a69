#include "clams/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace clams {

namespace {

Json params_to_json(const ClustererParams& params) {
  Json j;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KMeansParams>) {
          j["n_clusters"] = p.n_clusters;
          j["max_iter"] = p.max_iter;
          j["algorithm"] = p.variant == KMeansParams::Variant::lloyd ? "lloyd" : "elkan";
          j["n_init"] = p.n_init;
        } else if constexpr (std::is_same_v<T, MiniBatchKMeansParams>) {
          j["n_clusters"] = p.n_clusters;
          j["max_iter"] = p.max_iter;
          j["batch_size"] = p.batch_size;
        } else if constexpr (std::is_same_v<T, MeanShiftParams>) {
          j["bin_seeding"] = p.bin_seeding;
          j["min_bin_freq"] = p.min_bin_freq;
          j["max_iter"] = p.max_iter;
        } else if constexpr (std::is_same_v<T, AgglomerativeParams>) {
          j["n_clusters"] = p.n_clusters;
          j["affinity"] = to_string(p.metric);
          j["linkage"] = to_string(p.linkage);
        } else if constexpr (std::is_same_v<T, DbscanParams>) {
          j["eps"] = p.eps;
          j["min_samples"] = p.min_samples;
          j["p"] = p.p;
        } else if constexpr (std::is_same_v<T, OpticsParams>) {
          j["min_samples"] = p.min_samples;
          j["p"] = p.p;
          j["xi"] = p.xi;
        } else if constexpr (std::is_same_v<T, BirchParams>) {
          j["n_clusters"] = p.n_clusters;
          j["threshold"] = p.threshold;
          j["branching_factor"] = p.branching_factor;
        }
      },
      params);
  return j;
}

ClustererParams params_from_json(Algorithm algo, const Json& j) {
  switch (algo) {
    case Algorithm::kmeans: {
      KMeansParams p;
      p.n_clusters = j.at("n_clusters");
      p.max_iter = j.at("max_iter");
      p.variant = j.at("algorithm") == "elkan" ? KMeansParams::Variant::elkan
                                               : KMeansParams::Variant::lloyd;
      p.n_init = j.value("n_init", 10);
      return p;
    }
    case Algorithm::minibatch_kmeans: {
      MiniBatchKMeansParams p;
      p.n_clusters = j.at("n_clusters");
      p.max_iter = j.at("max_iter");
      p.batch_size = j.at("batch_size");
      return p;
    }
    case Algorithm::mean_shift: {
      MeanShiftParams p;
      p.bin_seeding = j.at("bin_seeding");
      p.min_bin_freq = j.at("min_bin_freq");
      p.max_iter = j.at("max_iter");
      return p;
    }
    case Algorithm::agglomerative: {
      AgglomerativeParams p;
      p.n_clusters = j.at("n_clusters");
      p.metric = metric_from_string(j.at("affinity"));
      p.linkage = linkage_from_string(j.at("linkage"));
      return p;
    }
    case Algorithm::dbscan: {
      DbscanParams p;
      p.eps = j.at("eps");
      p.min_samples = j.at("min_samples");
      p.p = j.at("p");
      return p;
    }
    case Algorithm::optics: {
      OpticsParams p;
      p.min_samples = j.at("min_samples");
      p.p = j.at("p");
      p.xi = j.at("xi");
      return p;
    }
    case Algorithm::birch: {
      BirchParams p;
      p.n_clusters = j.at("n_clusters");
      p.threshold = j.at("threshold");
      p.branching_factor = j.at("branching_factor");
      return p;
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace

Json pipeline_to_json(const Pipeline& p) {
  Json pre;
  pre["kind"] = to_string(p.preprocessor.kind);
  if (p.preprocessor.kind == Preprocessor::Kind::pca) pre["k"] = p.preprocessor.pca_k;
  Json j;
  j["preprocessor"] = pre;
  j["algorithm"] = to_string(p.clusterer.algorithm());
  j["hyperparams"] = params_to_json(p.clusterer.params);
  j["seed"] = p.clusterer.seed;
  return j;
}

Pipeline pipeline_from_json(const Json& j) {
  Pipeline p;
  const Json& pre = j.at("preprocessor");
  p.preprocessor.kind = preprocessor_from_string(pre.at("kind"));
  if (p.preprocessor.kind == Preprocessor::Kind::pca) p.preprocessor.pca_k = pre.at("k");
  const Algorithm algo = algorithm_from_string(j.at("algorithm"));
  p.clusterer.params = params_from_json(algo, j.at("hyperparams"));
  p.clusterer.seed = j.at("seed");
  return p;
}

Json search_result_to_json(const SearchResult& r) {
  Json j;
  j["schema_version"] = 1;
  j["best_pipeline"] = pipeline_to_json(r.best_pipeline);
  j["best_score"] = {{"metric", to_string(r.best_score.metric)}, {"value", r.best_score.value}};
  j["seed"] = r.seed;
  j["optimizer"] = to_string(r.optimizer);
  Json hist = Json::array();
  for (const auto& e : r.history) {
    Json h;
    h["pipeline"] = pipeline_to_json(e.pipeline);
    h["duration_ms"] = e.duration_ms;
    h["fidelity"] = e.fidelity;
    if (eval_ok(e.outcome)) {
      h["status"] = "ok";
      h["score"] = std::get<Score>(e.outcome).value;
    } else {
      const auto& err = std::get<EvalError>(e.outcome);
      switch (err.kind) {
        case EvalError::Kind::clusterer_failure: h["status"] = "clusterer_failure"; break;
        case EvalError::Kind::undefined_cvi: h["status"] = "undefined_cvi"; break;
        case EvalError::Kind::timeout: h["status"] = "timeout"; break;
        case EvalError::Kind::precondition: h["status"] = "precondition"; break;
      }
      h["message"] = err.message;
    }
    hist.push_back(std::move(h));
  }
  j["history"] = std::move(hist);
  return j;
}

Json point_cloud_to_json(const PointCloud& pc) {
  Json points = Json::array();
  for (Eigen::Index i = 0; i < pc.points.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < pc.points.cols(); ++j) row.push_back(pc.points(i, j));
    points.push_back(std::move(row));
  }
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < pc.weights.size(); ++i) weights.push_back(pc.weights[i]);
  return Json{{"points", std::move(points)}, {"weights", std::move(weights)}};
}

PointCloud point_cloud_from_json(const Json& j) {
  const auto& points = j.at("points");
  const auto& weights = j.at("weights");
  PointCloud pc;
  const auto m = points.size();
  if (m == 0) throw std::runtime_error("point cloud with no points");
  const auto c = points[0].size();
  pc.points.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < c; ++k)
      pc.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points[i][k];
  pc.weights.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) pc.weights[static_cast<Eigen::Index>(i)] = weights[i];
  return pc;
}

Json meta_entry_to_json(const MetaEntry& e) {
  Json j;
  j["dataset_name"] = e.dataset_name;
  j["content_hash"] = e.content_hash;
  j["pointcloud"] = point_cloud_to_json(e.pointcloud);
  j["pipeline"] = pipeline_to_json(e.pipeline);
  j["metric"] = to_string(e.metric);
  j["score"] = e.score;
  j["optimizer"] = to_string(e.optimizer);
  j["seed"] = e.seed;
  j["created_at"] = e.created_at;
  return j;
}

MetaEntry meta_entry_from_json(const Json& j) {
  MetaEntry e;
  e.dataset_name = j.at("dataset_name");
  e.content_hash = j.at("content_hash");
  e.pointcloud = point_cloud_from_json(j.at("pointcloud"));
  e.pipeline = pipeline_from_json(j.at("pipeline"));
  e.metric = cvi_from_string(j.at("metric"));
  e.score = j.at("score");
  e.optimizer = optimizer_from_string(j.at("optimizer"));
  e.seed = j.at("seed");
  e.created_at = j.at("created_at");
  return e;
}

Json recommendation_to_json(const Recommendation& r) {
  Json all = Json::array();
  for (const auto& d : r.all_distances) {
    Json e;
    e["name"] = d.name;
    if (d.distance)
      e["distance"] = *d.distance;
    else
      e["error"] = d.error;
    all.push_back(std::move(e));
  }
  return Json{{"schema_version", 1},
              {"chosen_pipeline", pipeline_to_json(r.chosen_pipeline)},
              {"source_dataset", r.source_dataset},
              {"distance", r.distance},
              {"all_distances", std::move(all)}};
}

Json rope_to_json(const RopePosterior& p) {
  return Json{{"p_left", p.p_left},
              {"p_rope", p.p_rope},
              {"p_right", p.p_right},
              {"rope", p.rope_width},
              {"samples", p.mc_samples}};
}

std::string history_to_csv(const SearchResult& r) {
  std::ostringstream out;
  out << "pipeline,score,duration_ms,status\n";
  for (const auto& e : r.history) {
    std::string pj = pipeline_to_json(e.pipeline).dump();
    std::string quoted = "\"";
    for (char c : pj) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += '"';
    out << quoted << ',';
    if (eval_ok(e.outcome))
      out << std::get<Score>(e.outcome).value << ',' << e.duration_ms << ",ok\n";
    else
      out << ',' << e.duration_ms << ",error\n";
  }
  return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace clams
