#include "clams/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "clams/rng.hpp"

namespace clams {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  if (begin == end) return false;
  char* parse_end = nullptr;
  std::string tmp(begin, end);
  out = std::strtod(tmp.c_str(), &parse_end);
  return parse_end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

// One CSV record; handles quoted fields with embedded commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double column_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::uint64_t fnv1a_hash(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Dataset parse_csv(const std::string& content, const std::string& name,
                  const std::optional<std::string>& label_column) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + name);
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t n_cols = header.size();

  int label_idx = -1;
  if (label_column) {
    for (std::size_t j = 0; j < n_cols; ++j)
      if (header[j] == *label_column) label_idx = static_cast<int>(j);
    if (label_idx < 0) throw std::runtime_error("label column not found: " + *label_column);
  }

  std::vector<std::vector<std::string>> cells;  // column-major, label excluded
  const std::size_t n_feat = n_cols - (label_idx >= 0 ? 1 : 0);
  cells.resize(n_feat);
  std::vector<std::string> label_cells;

  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != n_cols)
      throw std::runtime_error("ragged row in " + name + ": expected " + std::to_string(n_cols) +
                               " fields, got " + std::to_string(fields.size()));
    std::size_t fj = 0;
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (static_cast<int>(j) == label_idx)
        label_cells.push_back(fields[j]);
      else
        cells[fj++].push_back(fields[j]);
    }
  }

  const std::size_t n_rows = n_feat > 0 ? cells[0].size() : label_cells.size();
  if (n_rows < 2) throw std::runtime_error("fewer than 2 data rows in " + name);
  if (n_feat == 0) throw std::runtime_error("no feature columns in " + name);

  Dataset d;
  d.name = name;
  d.rows.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_feat));
  d.raw_columns.resize(n_feat);

  std::size_t fj = 0;
  for (std::size_t j = 0; j < n_cols; ++j) {
    if (static_cast<int>(j) == label_idx) continue;
    ColumnInfo& col = d.raw_columns[fj];
    col.name = header[j];
    // Numeric if every non-missing cell parses as a real number.
    bool numeric = true;
    for (const std::string& c : cells[fj]) {
      double v;
      if (!is_missing(c) && !parse_double(c, v)) {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      col.kind = ColumnKind::numeric;
      for (std::size_t i = 0; i < n_rows; ++i) {
        double v = kNaN;
        if (!is_missing(cells[fj][i])) parse_double(cells[fj][i], v);
        d.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fj)) = v;
      }
    } else {
      col.kind = ColumnKind::categorical;
      std::unordered_map<std::string, int> codes;
      for (std::size_t i = 0; i < n_rows; ++i) {
        const std::string& c = cells[fj][i];
        if (is_missing(c)) {
          d.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fj)) = kNaN;
          continue;
        }
        auto it = codes.find(c);
        if (it == codes.end()) {
          it = codes.emplace(c, static_cast<int>(col.categories.size())).first;
          col.categories.push_back(c);
        }
        d.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fj)) =
            static_cast<double>(it->second);
      }
    }
    ++fj;
  }

  if (label_idx >= 0) {
    std::vector<int> labels;
    labels.reserve(n_rows);
    std::unordered_map<std::string, int> codes;
    for (const std::string& c : label_cells) {
      auto it = codes.find(c);
      if (it == codes.end()) it = codes.emplace(c, static_cast<int>(codes.size())).first;
      labels.push_back(it->second);
    }
    d.labels = std::move(labels);
  }

  d.content_hash = fnv1a_hash(content.data(), content.size());
  return d;
}

Dataset ingest_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_csv(buf.str(), name, label_column);
}

Dataset vectorize(const Dataset& d, const VectorizerConfig& cfg) {
  if (cfg.cardinality_threshold < 2) throw std::invalid_argument("cardinality_threshold < 2");
  if (cfg.hash_buckets < 2) throw std::invalid_argument("hash bucket count < 2");
  const auto n = d.n();

  struct OutCol {
    std::string name;
    Vector values;
  };
  std::vector<OutCol> out;
  std::vector<std::string> warnings = d.warnings;

  for (Eigen::Index j = 0; j < d.dims(); ++j) {
    const ColumnInfo& col = d.raw_columns[static_cast<std::size_t>(j)];
    Vector raw = d.rows.col(j);
    std::vector<double> present;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isnan(raw[i])) present.push_back(raw[i]);
    if (present.empty()) {
      warnings.push_back("column dropped (all values missing): " + col.name);
      continue;
    }

    if (col.kind == ColumnKind::numeric) {
      const double med = column_median(present);
      Vector v = raw;
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::isnan(v[i])) v[i] = med;
      out.push_back({col.name, std::move(v)});
      continue;
    }

    // Categorical: mode imputation (lowest code wins ties), then encode.
    std::map<int, int> counts;
    for (double v : present) ++counts[static_cast<int>(v)];
    int mode = counts.begin()->first;
    for (const auto& [code, c] : counts)
      if (c > counts[mode]) mode = code;
    std::vector<int> codes(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      codes[static_cast<std::size_t>(i)] = std::isnan(raw[i]) ? mode : static_cast<int>(raw[i]);

    const int card = col.cardinality();
    if (card <= cfg.cardinality_threshold) {
      for (int c = 0; c < card; ++c) {
        Vector v = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
          if (codes[static_cast<std::size_t>(i)] == c) v[i] = 1.0;
        out.push_back({col.name + "=" + col.categories[static_cast<std::size_t>(c)], std::move(v)});
      }
    } else if (cfg.high_cardinality_strategy == VectorizerConfig::HighCardStrategy::frequency_encoding) {
      std::vector<double> freq(static_cast<std::size_t>(card), 0.0);
      for (int c : codes) freq[static_cast<std::size_t>(c)] += 1.0;
      for (double& f : freq) f /= static_cast<double>(n);
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = freq[static_cast<std::size_t>(codes[static_cast<std::size_t>(i)])];
      out.push_back({col.name + "#freq", std::move(v)});
    } else {
      const int buckets = cfg.hash_buckets;
      std::vector<Vector> cols(static_cast<std::size_t>(buckets), Vector::Zero(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::string& cat = col.categories[static_cast<std::size_t>(codes[static_cast<std::size_t>(i)])];
        const auto h = fnv1a_hash(cat.data(), cat.size());
        cols[static_cast<std::size_t>(h % static_cast<std::uint64_t>(buckets))][i] += 1.0;
      }
      for (int b = 0; b < buckets; ++b)
        out.push_back({col.name + "#h" + std::to_string(b), std::move(cols[static_cast<std::size_t>(b)])});
    }
  }

  if (out.empty()) throw std::runtime_error("vectorize: no usable columns");

  Dataset r;
  r.name = d.name;
  r.labels = d.labels;
  r.content_hash = d.content_hash;
  r.vectorized = true;
  r.warnings = std::move(warnings);
  r.rows.resize(n, static_cast<Eigen::Index>(out.size()));
  r.raw_columns.resize(out.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    r.raw_columns[j].name = out[j].name;
    r.raw_columns[j].kind = ColumnKind::numeric;
    r.rows.col(static_cast<Eigen::Index>(j)) = out[j].values;
  }
  return r;
}

namespace {

// FastICA deflation with tanh contrast on pre-whitened data Z (m x c).
// Returns false if any component failed to converge.
bool fastica_deflation(const Matrix& Z, int max_iter, double tol, Rng& rng, Matrix& W_out) {
  const Eigen::Index c = Z.cols();
  const auto m = static_cast<double>(Z.rows());
  Matrix W = Matrix::Zero(c, c);
  bool all_converged = true;
  for (Eigen::Index k = 0; k < c; ++k) {
    Vector w(c);
    for (Eigen::Index i = 0; i < c; ++i) w[i] = rng.normal();
    // Gram-Schmidt against recovered components.
    auto decorrelate = [&](Vector& v) {
      for (Eigen::Index j = 0; j < k; ++j) v -= v.dot(W.col(j)) * W.col(j);
      const double nrm = v.norm();
      if (nrm > 1e-12) v /= nrm;
    };
    decorrelate(w);
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      const Vector proj = Z * w;                        // m
      const Vector gx = proj.array().tanh().matrix();   // g
      const double g_prime_mean = (1.0 - gx.array().square()).mean();
      Vector w_new = (Z.transpose() * gx) / m - g_prime_mean * w;
      decorrelate(w_new);
      const double delta = std::abs(std::abs(w_new.dot(w)) - 1.0);
      w = w_new;
      if (delta < tol) {
        converged = true;
        break;
      }
    }
    all_converged = all_converged && converged;
    W.col(k) = w;
  }
  W_out = W;
  return all_converged;
}

}  // namespace

PointCloud ica_transform(const Dataset& d, const IcaConfig& cfg) {
  if (!d.rows.allFinite()) throw std::invalid_argument("ica_transform: dataset has NaN/Inf (vectorize first)");
  if (cfg.max_iter < 1 || cfg.tol <= 0) throw std::invalid_argument("ica_transform: bad config");
  const Eigen::Index n = d.n();
  if (n < 2) throw std::invalid_argument("ica_transform: fewer than 2 rows");

  Rng rng(Rng::splitmix(cfg.seed ^ 0x1caULL));

  // Seeded uniform row subsample down to row_cap.
  Matrix X;
  if (cfg.row_cap > 0 && n > cfg.row_cap) {
    const auto idx = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                    static_cast<std::size_t>(cfg.row_cap));
    X.resize(static_cast<Eigen::Index>(idx.size()), d.dims());
    for (std::size_t i = 0; i < idx.size(); ++i)
      X.row(static_cast<Eigen::Index>(i)) = d.rows.row(static_cast<Eigen::Index>(idx[i]));
  } else {
    X = d.rows;
  }
  const auto m = X.rows();

  // Drop constant columns (singular covariance otherwise).
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - X.col(j).mean()).square().mean();
    if (var > 1e-12) keep.push_back(j);
  }
  if (keep.empty()) throw std::runtime_error("ica_transform: all columns constant");
  Matrix Xe(m, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) Xe.col(static_cast<Eigen::Index>(j)) = X.col(keep[j]);

  const Eigen::Index d_eff = Xe.cols();
  Eigen::Index c = cfg.n_components > 0 ? cfg.n_components : std::min<Eigen::Index>(10, d_eff);
  if (c > d_eff) throw std::invalid_argument("ica_transform: n_components > effective dims");

  // Center and whiten via covariance eigendecomposition.
  const Vector mean = Xe.colwise().mean();
  Matrix Xc = Xe.rowwise() - mean.transpose();
  const Matrix cov = (Xc.transpose() * Xc) / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Top-c eigenpairs (Eigen sorts ascending).
  Matrix whitener(d_eff, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    const Eigen::Index src = d_eff - 1 - j;
    const double lam = std::max(eig.eigenvalues()[src], 1e-12);
    whitener.col(j) = eig.eigenvectors().col(src) / std::sqrt(lam);
  }
  Matrix Z = Xc * whitener;  // m x c, identity covariance

  Matrix W;
  const bool converged = fastica_deflation(Z, cfg.max_iter, cfg.tol, rng, W);

  PointCloud pc;
  pc.ica_converged = converged;
  pc.points = converged ? Matrix(Z * W) : Z;  // fallback: whitened PCA projection
  pc.weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
  if (!pc.points.allFinite()) throw std::runtime_error("ica_transform: non-finite output");
  return pc;
}

SynthFamily synth_family_from_string(const std::string& s) {
  if (s == "blobs") return SynthFamily::blobs;
  if (s == "anisotropic") return SynthFamily::anisotropic;
  if (s == "rings") return SynthFamily::rings;
  throw std::invalid_argument("unknown synthetic family: " + s);
}

std::string to_string(SynthFamily f) {
  switch (f) {
    case SynthFamily::blobs: return "blobs";
    case SynthFamily::anisotropic: return "anisotropic";
    case SynthFamily::rings: return "rings";
  }
  return "?";
}

Dataset synth_dataset(SynthFamily family, int n, int d, int k, std::uint64_t seed) {
  if (n < k || k < 1 || d < 1) throw std::invalid_argument("synth_dataset: need n >= k >= 1, d >= 1");
  if (family == SynthFamily::rings && d != 2)
    throw std::invalid_argument("synth_dataset: rings requires d = 2");

  Rng rng(Rng::splitmix(seed ^ 0x5f37ULL));
  Dataset ds;
  ds.rows.resize(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n));

  if (family == SynthFamily::blobs || family == SynthFamily::anisotropic) {
    const double sigma = 0.3;
    // Random centers with a minimum separation so clusters stay identifiable,
    // and a non-degeneracy check so the centers do not sit near a single line
    // (whitening blows up the near-null direction of collinear layouts).
    Matrix centers(k, d);
    for (int tries = 0; tries < 50; ++tries) {
      for (int c = 0; c < k; ++c) {
        for (int attempt = 0; attempt < 200; ++attempt) {
          for (int j = 0; j < d; ++j) centers(c, j) = rng.uniform(-10.0, 10.0);
          bool ok = true;
          for (int c2 = 0; c2 < c; ++c2)
            if ((centers.row(c) - centers.row(c2)).norm() < 5.0) ok = false;
          if (ok) break;
        }
      }
      if (k < 3 || k <= d) break;  // too few centers to span d directions
      const Matrix cc = centers.rowwise() - centers.colwise().mean();
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cc.transpose() * cc);
      const Vector& ev = eig.eigenvalues();
      if (ev[ev.size() - 1] <= 0.0 || ev[0] / ev[ev.size() - 1] >= 0.1225) break;
    }
    for (int i = 0; i < n; ++i) {
      const int c = i % k;  // near-equal cluster sizes
      labels[static_cast<std::size_t>(i)] = c;
      for (int j = 0; j < d; ++j) ds.rows(i, j) = centers(c, j) + sigma * rng.normal();
    }
    if (family == SynthFamily::anisotropic) {
      // Fixed shear applied to the first two dimensions.
      Matrix T = Matrix::Identity(d, d);
      if (d >= 2) {
        T(0, 0) = 0.6; T(0, 1) = -0.6;
        T(1, 0) = -0.4; T(1, 1) = 0.8;
      } else {
        T(0, 0) = 0.5;
      }
      ds.rows = ds.rows * T.transpose();
    }
  } else {
    // Concentric rings with radial noise; near-equal points per ring.
    for (int i = 0; i < n; ++i) {
      const int c = i % k;
      labels[static_cast<std::size_t>(i)] = c;
      const double radius = 0.5 + 3.0 * c;
      const double r = radius + 0.05 * rng.normal();
      const double theta = rng.uniform(0.0, 6.283185307179586);
      ds.rows(i, 0) = r * std::cos(theta);
      ds.rows(i, 1) = r * std::sin(theta);
    }
  }

  ds.name = to_string(family) + "_n" + std::to_string(n) + "_k" + std::to_string(k) + "_s" +
            std::to_string(seed);
  ds.labels = std::move(labels);
  ds.raw_columns.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    ds.raw_columns[static_cast<std::size_t>(j)].name = "f" + std::to_string(j);
    ds.raw_columns[static_cast<std::size_t>(j)].kind = ColumnKind::numeric;
  }
  ds.vectorized = true;
  const std::string csv = dataset_to_csv(ds);
  ds.content_hash = fnv1a_hash(csv.data(), csv.size());
  return ds;
}

std::string dataset_to_csv(const Dataset& d) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index j = 0; j < d.dims(); ++j) {
    if (j) out << ',';
    out << (d.raw_columns.empty() ? "f" + std::to_string(j) : d.raw_columns[static_cast<std::size_t>(j)].name);
  }
  if (d.labels) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.dims(); ++j) {
      if (j) out << ',';
      out << d.rows(i, j);
    }
    if (d.labels) out << ',' << (*d.labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  return out.str();
}

}  // namespace clams
