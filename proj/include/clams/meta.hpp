#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clams/cvi.hpp"
#include "clams/data.hpp"
#include "clams/ot.hpp"
#include "clams/search.hpp"

namespace clams {

struct MetaEntry {
  std::string dataset_name;
  std::uint64_t content_hash = 0;
  PointCloud pointcloud;  // phi output, row-capped
  Pipeline pipeline;
  CviMetric metric = CviMetric::ami;
  double score = 0.0;
  Optimizer optimizer = Optimizer::evolution;
  std::uint64_t seed = 0;
  std::string created_at;  // ISO-8601 UTC
};

struct MetaTrainConfig {
  SearchBudget budget;
  Optimizer optimizer = Optimizer::evolution;
  SearchOptions search;
  VectorizerConfig vectorizer;
  IcaConfig ica;
};

// Algorithm-per-dataset meta-training: best pipeline + phi cloud per dataset.
// Datasets where no valid pipeline is found are skipped with a warning.
std::vector<MetaEntry> meta_train(const std::vector<Dataset>& suite, CviMetric metric,
                                  const MetaTrainConfig& cfg, std::uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

void store_save(const std::vector<MetaEntry>& entries, const std::string& path);
std::vector<MetaEntry> store_load(const std::string& path);

struct DistanceOrError {
  std::string name;
  std::optional<double> distance;  // nullopt = failed pair
  std::string error;
};

struct Recommendation {
  Pipeline chosen_pipeline;
  std::string source_dataset;
  double distance = 0.0;
  std::vector<DistanceOrError> all_distances;
};

struct RecommendConfig {
  VectorizerConfig vectorizer;
  IcaConfig ica;
  int rank = 6;
  std::uint64_t seed = 0;
  int threads = 1;
};

Recommendation recommend(const Dataset& d_test, const std::vector<MetaEntry>& store,
                         const RecommendConfig& cfg = {});

struct ApplicationResult {
  ClusterAssignment assignment;
  std::optional<Score> score;  // AMI, present when d_test has labels
  bool pca_clamped = false;
};

ApplicationResult apply_recommendation(const Recommendation& rec, const Dataset& d_test);

}  // namespace clams
