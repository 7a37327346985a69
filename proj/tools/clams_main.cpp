#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "clams/json_io.hpp"
#include "clams/meta.hpp"
#include "clams/ot.hpp"
#include "clams/search.hpp"
#include "clams/stats.hpp"

namespace fs = std::filesystem;
using namespace clams;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoResult = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> list_csvs(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  return paths;
}

struct Global {
  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = false;
};

void log_verbose(const Global& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << "\n";
}

SearchBudget make_budget(int evals, double secs) {
  SearchBudget b;
  if (evals > 0) b.max_evaluations = evals;
  if (secs > 0) b.wall_time_s = secs;
  return b;
}

int cmd_fit(const Global& g, const std::string& data_path, const std::string& label_col,
            const std::string& metric_s, const std::string& optimizer_s, int budget_evals,
            double budget_secs, const std::string& out_path) {
  const CviMetric metric = cvi_from_string(metric_s);
  if (is_external(metric) && label_col.empty()) {
    std::cerr << "error: metric '" << metric_s << "' requires --label-col\n";
    return kExitUsage;
  }
  const SearchBudget budget = make_budget(budget_evals, budget_secs);
  if (!budget.valid()) {
    std::cerr << "error: need --budget-evals or --budget-secs\n";
    return kExitUsage;
  }
  Dataset d = ingest_csv(data_path, label_col.empty()
                                        ? std::optional<std::string>{}
                                        : std::optional<std::string>{label_col});
  d = vectorize(d);
  SearchOptions opts;
  opts.threads = g.threads;
  log_verbose(g, "searching " + d.name + " (" + std::to_string(d.n()) + " rows)");
  SearchResult res;
  try {
    res = run_search(optimizer_from_string(optimizer_s), d, metric, budget, g.seed, opts);
  } catch (const NoValidPipeline& e) {
    std::cerr << "no valid pipeline: " << e.what() << "\n";
    return kExitNoResult;
  }
  write_file_atomic(out_path, search_result_to_json(res).dump(2) + "\n");
  log_verbose(g, "best score " + std::to_string(res.best_score.value));
  return kExitOk;
}

int cmd_meta_train(const Global& g, const std::string& suite_dir, const std::string& label_col,
                   const std::string& metric_s, const std::string& optimizer_s, int budget_evals,
                   double budget_secs, const std::string& store_path) {
  const CviMetric metric = cvi_from_string(metric_s);
  if (is_external(metric) && label_col.empty()) {
    std::cerr << "error: metric '" << metric_s << "' requires --label-col\n";
    return kExitUsage;
  }
  const auto paths = list_csvs(suite_dir);
  if (paths.empty()) {
    std::cerr << "error: no CSV files in " << suite_dir << "\n";
    return kExitUsage;
  }
  std::vector<Dataset> suite;
  for (const auto& p : paths)
    suite.push_back(ingest_csv(p, label_col.empty() ? std::optional<std::string>{}
                                                    : std::optional<std::string>{label_col}));
  MetaTrainConfig cfg;
  cfg.budget = make_budget(budget_evals, budget_secs);
  if (!cfg.budget.valid()) {
    std::cerr << "error: need --budget-evals or --budget-secs\n";
    return kExitUsage;
  }
  cfg.optimizer = optimizer_from_string(optimizer_s);
  cfg.search.threads = g.threads;
  std::vector<std::string> warnings;
  const auto entries = meta_train(suite, metric, cfg, g.seed, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (entries.empty()) {
    std::cerr << "no dataset produced a valid pipeline\n";
    return kExitNoResult;
  }
  store_save(entries, store_path);
  log_verbose(g, "stored " + std::to_string(entries.size()) + " entries");
  return kExitOk;
}

int cmd_recommend(const Global& g, const std::string& data_path, const std::string& store_path,
                  const std::string& label_col, int rank, bool apply, const std::string& out_path,
                  const std::string& labels_out) {
  const auto store = store_load(store_path);
  Dataset d = ingest_csv(data_path, label_col.empty()
                                        ? std::optional<std::string>{}
                                        : std::optional<std::string>{label_col});
  RecommendConfig cfg;
  cfg.rank = rank;
  cfg.seed = g.seed;
  cfg.threads = g.threads;
  const Recommendation rec = recommend(d, store, cfg);
  Json out = recommendation_to_json(rec);
  if (apply) {
    const Dataset dv = d.vectorized ? d : vectorize(d);
    const ApplicationResult app = apply_recommendation(rec, dv);
    out["applied"] = Json{{"n_clusters_found", app.assignment.n_clusters_found},
                          {"pca_clamped", app.pca_clamped}};
    if (app.score) out["applied"]["ami"] = app.score->value;
    std::ostringstream csv;
    csv << "label\n";
    for (int l : app.assignment.labels) csv << l << "\n";
    const std::string lpath =
        labels_out.empty() ? out_path + ".labels.csv" : labels_out;
    write_file_atomic(lpath, csv.str());
    log_verbose(g, "labels written to " + lpath);
  }
  write_file_atomic(out_path, out.dump(2) + "\n");
  log_verbose(g, "chose pipeline from " + rec.source_dataset);
  return kExitOk;
}

int cmd_distance(const Global& g, const std::string& suite_dir, const std::string& path_a,
                 const std::string& path_b, int rank, const std::string& out_path) {
  DistanceConfig cfg;
  cfg.rank = rank;
  cfg.seed = g.seed;
  cfg.ica.seed = g.seed;
  if (!suite_dir.empty()) {
    const auto paths = list_csvs(suite_dir);
    if (paths.empty()) {
      std::cerr << "error: no CSV files in " << suite_dir << "\n";
      return kExitUsage;
    }
    std::vector<Dataset> suite;
    for (const auto& p : paths) suite.push_back(ingest_csv(p));
    const Matrix D = pairwise_distance_matrix(suite, cfg, g.threads);
    std::ostringstream csv;
    csv << "dataset";
    for (const auto& d : suite) csv << "," << d.name;
    csv << "\n";
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
      csv << suite[static_cast<std::size_t>(i)].name;
      for (Eigen::Index j = 0; j < D.cols(); ++j) {
        csv << ",";
        if (std::isnan(D(i, j)))
          csv << "NA";
        else
          csv << std::setprecision(17) << D(i, j);
      }
      csv << "\n";
    }
    write_file_atomic(out_path, csv.str());
    return kExitOk;
  }
  const Dataset a = ingest_csv(path_a);
  const Dataset b = ingest_csv(path_b);
  const double dist = dataset_distance(a, b, cfg);
  Json out{{"schema_version", 1}, {"a", a.name}, {"b", b.name}, {"distance", dist},
           {"rank", rank}};
  write_file_atomic(out_path, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_evaluate_rope(const Global& g, const std::string& scores_path,
                      const std::string& method_a, const std::string& method_b, double rope,
                      int samples, const std::string& out_path) {
  const ScoreTable t = score_table_from_csv(slurp(scores_path));
  const auto find = [&](const std::string& m) -> Eigen::Index {
    for (std::size_t j = 0; j < t.methods.size(); ++j)
      if (t.methods[j] == m) return static_cast<Eigen::Index>(j);
    throw std::runtime_error("method not in scores CSV: " + m);
  };
  const Eigen::Index ja = find(method_a), jb = find(method_b);
  std::vector<double> a, b;
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    a.push_back(t.values(i, ja));
    b.push_back(t.values(i, jb));
  }
  const RopePosterior post = rope_signed_rank(a, b, rope, samples, g.seed);
  write_file_atomic(out_path, rope_to_json(post).dump(2) + "\n");
  return kExitOk;
}

int cmd_evaluate_cd(const std::string& scores_path, const std::string& out_prefix) {
  const ScoreTable t = score_table_from_csv(slurp(scores_path));
  const CdResult cd = critical_difference_ranks(t);
  std::ostringstream csv;
  csv << "method,avg_rank\n";
  for (const auto& [m, r] : cd.average_ranks)
    csv << m << "," << std::setprecision(17) << r << "\n";
  write_file_atomic(out_prefix + "_ranks.csv", csv.str());
  Json out{{"schema_version", 1},
           {"friedman", cd.friedman_statistic},
           {"cd_alpha05", cd.cd_alpha05}};
  write_file_atomic(out_prefix + ".json", out.dump(2) + "\n");
  return kExitOk;
}

int cmd_synth(const std::string& family_s, int n, int d, int k, std::uint64_t seed,
              const std::string& out_path) {
  const Dataset ds = synth_dataset(synth_family_from_string(family_s), n, d, k, seed);
  write_file_atomic(out_path, dataset_to_csv(ds));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clams: clustering pipeline search and zero-shot recommendation"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
  app.add_flag("--verbose", g.verbose, "log progress to stderr");

  std::string data_path, label_col, metric_s = "ami", optimizer_s = "evolution";
  std::string out_path, store_path, suite_dir, path_a, path_b, labels_out;
  int budget_evals = 0, rank = 6, n = 300, dims = 2, k = 3, mc_samples = 50000;
  double budget_secs = 0.0, rope = 0.01;
  bool apply = false;
  std::string method_a, method_b, family_s = "blobs";

  auto* fit = app.add_subcommand("fit", "search for a clustering pipeline on one dataset");
  fit->add_option("--data", data_path, "input CSV")->required();
  fit->add_option("--label-col", label_col, "ground-truth label column");
  fit->add_option("--metric", metric_s, "ami|ari|silhouette|calinski_harabasz")
      ->capture_default_str();
  fit->add_option("--optimizer", optimizer_s, "random|asha|evolution")->capture_default_str();
  fit->add_option("--budget-evals", budget_evals, "max pipeline evaluations");
  fit->add_option("--budget-secs", budget_secs, "wall-time budget in seconds");
  fit->add_option("--out", out_path, "output JSON path")->required();

  auto* mt = app.add_subcommand("meta-train", "search every CSV in a suite, save a store");
  mt->add_option("--suite", suite_dir, "directory of CSVs")->required();
  mt->add_option("--label-col", label_col, "ground-truth label column");
  mt->add_option("--metric", metric_s, "ami|ari|silhouette|calinski_harabasz")
      ->capture_default_str();
  mt->add_option("--optimizer", optimizer_s, "random|asha|evolution")->capture_default_str();
  mt->add_option("--budget-evals", budget_evals, "max evaluations per dataset");
  mt->add_option("--budget-secs", budget_secs, "wall-time budget per dataset");
  mt->add_option("--store", store_path, "output store JSON path")->required();

  auto* rec = app.add_subcommand("recommend", "pick the stored pipeline of the nearest dataset");
  rec->add_option("--data", data_path, "input CSV")->required();
  rec->add_option("--store", store_path, "meta-store JSON")->required();
  rec->add_option("--label-col", label_col, "label column (scores the applied pipeline)");
  rec->add_option("--rank", rank, "low-rank coupling rank")->capture_default_str();
  rec->add_flag("--apply", apply, "run the chosen pipeline and write labels CSV");
  rec->add_option("--labels-out", labels_out, "labels CSV path (default <out>.labels.csv)");
  rec->add_option("--out", out_path, "output JSON path")->required();

  auto* dist = app.add_subcommand("distance", "dataset distances");
  dist->add_option("--suite", suite_dir, "directory of CSVs (pairwise matrix mode)");
  dist->add_option("--a", path_a, "first CSV (pair mode)");
  dist->add_option("--b", path_b, "second CSV (pair mode)");
  dist->add_option("--rank", rank, "low-rank coupling rank")->capture_default_str();
  dist->add_option("--out", out_path, "output path")->required();

  auto* ev = app.add_subcommand("evaluate", "benchmark comparison statistics");
  ev->require_subcommand(1);
  auto* ev_rope = ev->add_subcommand("rope", "Bayesian signed-rank test");
  ev_rope->add_option("--scores", data_path, "scores CSV (rows datasets, cols methods)")
      ->required();
  ev_rope->add_option("--method-a", method_a, "first method column")->required();
  ev_rope->add_option("--method-b", method_b, "second method column")->required();
  ev_rope->add_option("--rope", rope, "region of practical equivalence")->capture_default_str();
  ev_rope->add_option("--samples", mc_samples, "Monte Carlo samples")->capture_default_str();
  ev_rope->add_option("--out", out_path, "output JSON path")->required();
  auto* ev_cd = ev->add_subcommand("cd", "critical-difference average ranks");
  ev_cd->add_option("--scores", data_path, "scores CSV")->required();
  ev_cd->add_option("--out", out_path, "output prefix (<prefix>_ranks.csv, <prefix>.json)")
      ->required();

  auto* sy = app.add_subcommand("synth", "generate a labeled synthetic CSV");
  sy->add_option("--family", family_s, "blobs|anisotropic|rings")->capture_default_str();
  sy->add_option("--n", n, "rows")->capture_default_str();
  sy->add_option("--d", dims, "feature dimensions")->capture_default_str();
  sy->add_option("--k", k, "clusters")->capture_default_str();
  sy->add_option("--out", out_path, "output CSV path")->required();

  for (auto* sub : {fit, mt, rec, dist, ev, sy}) sub->fallthrough();
  for (auto* sub : {ev_rope, ev_cd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed())
      return cmd_fit(g, data_path, label_col, metric_s, optimizer_s, budget_evals, budget_secs,
                     out_path);
    if (mt->parsed())
      return cmd_meta_train(g, suite_dir, label_col, metric_s, optimizer_s, budget_evals,
                            budget_secs, store_path);
    if (rec->parsed())
      return cmd_recommend(g, data_path, store_path, label_col, rank, apply, out_path,
                           labels_out);
    if (dist->parsed()) {
      if (suite_dir.empty() && (path_a.empty() || path_b.empty())) {
        std::cerr << "error: need --suite or both --a and --b\n";
        return kExitUsage;
      }
      return cmd_distance(g, suite_dir, path_a, path_b, rank, out_path);
    }
    if (ev->parsed()) {
      if (ev_rope->parsed())
        return cmd_evaluate_rope(g, data_path, method_a, method_b, rope, mc_samples, out_path);
      return cmd_evaluate_cd(data_path, out_path);
    }
    if (sy->parsed()) return cmd_synth(family_s, n, dims, k, g.seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
