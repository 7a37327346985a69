#include "clams/meta.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "clams/json_io.hpp"
#include "clams/parallel.hpp"

namespace clams {

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<MetaEntry> meta_train(const std::vector<Dataset>& suite, CviMetric metric,
                                  const MetaTrainConfig& cfg, std::uint64_t seed,
                                  std::vector<std::string>* warnings) {
  std::vector<MetaEntry> entries;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Dataset& raw = suite[i];
    const Dataset d = raw.vectorized ? raw : vectorize(raw, cfg.vectorizer);
    const std::uint64_t ds_seed = Rng::splitmix(seed + 0x9e37ULL * (i + 1));
    SearchResult result;
    try {
      result = run_search(cfg.optimizer, d, metric, cfg.budget, ds_seed, cfg.search);
    } catch (const NoValidPipeline&) {
      if (warnings) warnings->push_back("no valid pipeline for dataset " + d.name + "; skipped");
      continue;
    }
    IcaConfig ica = cfg.ica;
    ica.seed = seed;
    MetaEntry e;
    e.dataset_name = d.name;
    e.content_hash = d.content_hash;
    e.pointcloud = ica_transform(d, ica);
    e.pipeline = result.best_pipeline;
    e.metric = metric;
    e.score = result.best_score.value;
    e.optimizer = cfg.optimizer;
    e.seed = ds_seed;
    e.created_at = utc_timestamp();
    entries.push_back(std::move(e));
  }
  return entries;
}

void store_save(const std::vector<MetaEntry>& entries, const std::string& path) {
  Json j;
  j["schema_version"] = 1;
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back(meta_entry_to_json(e));
  j["entries"] = std::move(arr);
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<MetaEntry> store_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open store: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw std::runtime_error("corrupt store file " + path + ": " + e.what());
  }
  if (!j.contains("schema_version") || j.at("schema_version") != 1)
    throw std::runtime_error("unsupported store schema_version in " + path);
  std::vector<MetaEntry> entries;
  for (const auto& e : j.at("entries")) entries.push_back(meta_entry_from_json(e));
  return entries;
}

Recommendation recommend(const Dataset& d_test, const std::vector<MetaEntry>& store,
                         const RecommendConfig& cfg) {
  if (store.empty()) throw std::runtime_error("recommend: empty meta-store");

  const Dataset v = d_test.vectorized ? d_test : vectorize(d_test, cfg.vectorizer);
  IcaConfig ica = cfg.ica;
  ica.seed = cfg.seed;
  const PointCloud test_cloud = ica_transform(v, ica);

  std::vector<DistanceOrError> dists(store.size());
  parallel_for(store.size(), cfg.threads, [&](std::size_t i) {
    dists[i].name = store[i].dataset_name;
    if (store[i].content_hash == d_test.content_hash) {
      dists[i].error = "excluded: same dataset (content hash match)";
      return;
    }
    try {
      dists[i].distance =
          point_cloud_distance(test_cloud, store[i].pointcloud, cfg.rank, cfg.seed);
    } catch (const std::exception& e) {
      dists[i].error = e.what();
    }
  });

  int best = -1;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    if (!dists[i].distance) continue;
    if (best < 0 || *dists[i].distance < *dists[static_cast<std::size_t>(best)].distance)
      best = static_cast<int>(i);
  }
  if (best < 0) throw std::runtime_error("recommend: no comparable dataset in store");

  Recommendation rec;
  rec.chosen_pipeline = store[static_cast<std::size_t>(best)].pipeline;
  rec.source_dataset = store[static_cast<std::size_t>(best)].dataset_name;
  rec.distance = *dists[static_cast<std::size_t>(best)].distance;
  rec.all_distances = std::move(dists);
  return rec;
}

ApplicationResult apply_recommendation(const Recommendation& rec, const Dataset& d_test) {
  Pipeline p = rec.chosen_pipeline;
  ApplicationResult out;
  if (p.preprocessor.kind == Preprocessor::Kind::pca &&
      p.preprocessor.pca_k > static_cast<int>(d_test.dims())) {
    p.preprocessor.pca_k = static_cast<int>(d_test.dims());
    out.pca_clamped = true;
  }
  const Matrix X = apply_preprocessor(p.preprocessor, d_test.rows);
  out.assignment = run_clusterer(p.clusterer, X);  // pipeline failures propagate
  if (d_test.labels) out.score = Score{CviMetric::ami, ami(*d_test.labels, out.assignment.labels)};
  return out;
}

}  // namespace clams
