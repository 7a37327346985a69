#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clams {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ColumnKind { numeric, categorical };

struct ColumnInfo {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  // Category strings in first-appearance order; cell values in Dataset::rows
  // are indices into this list until vectorize() expands them.
  std::vector<std::string> categories;
  int cardinality() const { return static_cast<int>(categories.size()); }
};

// Tabular dataset. Before vectorize(), categorical cells hold category codes
// and missing values are NaN; afterwards rows is fully numeric.
struct Dataset {
  std::string name;
  Matrix rows;
  std::vector<ColumnInfo> raw_columns;
  std::optional<std::vector<int>> labels;
  std::uint64_t content_hash = 0;
  bool vectorized = false;
  std::vector<std::string> warnings;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index dims() const { return rows.cols(); }
};

struct VectorizerConfig {
  enum class HighCardStrategy { frequency_encoding, hashing };
  int cardinality_threshold = 30;
  HighCardStrategy high_cardinality_strategy = HighCardStrategy::frequency_encoding;
  int hash_buckets = 32;
};

struct IcaConfig {
  int n_components = 0;  // 0 = min(10, effective dims)
  int max_iter = 200;
  double tol = 1e-4;
  int row_cap = 500;
  std::uint64_t seed = 0;
};

struct PointCloud {
  Matrix points;   // m x c
  Vector weights;  // length m, sums to 1
  bool ica_converged = true;

  Eigen::Index size() const { return points.rows(); }
};

// CSV ingestion: comma-delimited, header row required, "" or "NA" = missing.
Dataset ingest_csv(const std::string& path, const std::optional<std::string>& label_column = {});

// Parse an in-memory CSV body (used by ingest_csv and tests).
Dataset parse_csv(const std::string& content, const std::string& name,
                  const std::optional<std::string>& label_column = {});

Dataset vectorize(const Dataset& d, const VectorizerConfig& cfg = {});

PointCloud ica_transform(const Dataset& d, const IcaConfig& cfg = {});

enum class SynthFamily { blobs, anisotropic, rings };

Dataset synth_dataset(SynthFamily family, int n, int d, int k, std::uint64_t seed);

SynthFamily synth_family_from_string(const std::string& s);
std::string to_string(SynthFamily f);

// Writes a dataset as CSV (feature columns f0..f{d-1}, optional label column).
std::string dataset_to_csv(const Dataset& d);

std::uint64_t fnv1a_hash(const void* data, std::size_t len);

}  // namespace clams
