#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clams/clustering.hpp"
#include "clams/cvi.hpp"
#include "clams/data.hpp"
#include "clams/rng.hpp"

namespace clams {

struct Preprocessor {
  enum class Kind { none, standard_scale, minmax_scale, pca } kind = Kind::none;
  int pca_k = 0;  // only for pca; clamped to input dims at evaluation time
};

std::string to_string(Preprocessor::Kind k);
Preprocessor::Kind preprocessor_from_string(const std::string& s);

struct Pipeline {
  Preprocessor preprocessor;
  ClustererConfig clusterer;
};

struct SearchBudget {
  std::optional<int> max_evaluations;
  std::optional<double> wall_time_s;
  double per_eval_timeout_s = 60.0;

  bool valid() const {
    return (max_evaluations || wall_time_s) && per_eval_timeout_s > 0;
  }
};

struct EvalError {
  enum class Kind { clusterer_failure, undefined_cvi, timeout, precondition } kind;
  std::string message;
};

using EvalOutcome = std::variant<Score, EvalError>;

inline bool eval_ok(const EvalOutcome& o) { return std::holds_alternative<Score>(o); }
inline double eval_fitness(const EvalOutcome& o) {
  return eval_ok(o) ? std::get<Score>(o).value : -std::numeric_limits<double>::infinity();
}

struct HistoryEntry {
  Pipeline pipeline;
  EvalOutcome outcome;
  double duration_ms = 0.0;
  double fidelity = 1.0;  // row fraction (ASHA rungs evaluate subsamples)
};

enum class Optimizer { random, asha, evolution };
std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct SearchResult {
  Pipeline best_pipeline;
  Score best_score;
  std::vector<HistoryEntry> history;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::random;
};

// Raised when a search finishes with zero successful evaluations.
struct NoValidPipeline : std::runtime_error {
  explicit NoValidPipeline(const std::string& what) : std::runtime_error(what) {}
};

Matrix apply_preprocessor(const Preprocessor& pre, const Matrix& X);

// Full evaluation: preprocess, cluster all rows, score. Durations past the
// per-eval timeout are classified as timeout errors.
EvalOutcome evaluate_pipeline(const Pipeline& p, const Dataset& d, CviMetric metric,
                              double timeout_s = 0.0);

// Same, but also hands back the assignment (used by apply/recommend paths).
EvalOutcome evaluate_pipeline_with_labels(const Pipeline& p, const Dataset& d, CviMetric metric,
                                          double timeout_s, ClusterAssignment* out_assignment);

Pipeline sample_pipeline(Rng& rng, int input_dims);

// Mutation / crossover operators of the evolutionary search.
Pipeline mutate_pipeline(const Pipeline& parent, Rng& rng, int input_dims);
std::pair<Pipeline, Pipeline> crossover_pipelines(const Pipeline& a, const Pipeline& b);

struct SearchOptions {
  int threads = 1;
  // ASHA
  int reduction_factor = 3;
  double min_fraction = 1.0 / 9.0;
  // Evolution
  int pop_size = 10;
  double p_cross = 0.3;
  int tournament_size = 3;
};

SearchResult random_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                           std::uint64_t seed, const SearchOptions& opts = {});
SearchResult asha_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                         std::uint64_t seed, const SearchOptions& opts = {});
SearchResult evolution_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                              std::uint64_t seed, const SearchOptions& opts = {});

SearchResult run_search(Optimizer opt, const Dataset& d, CviMetric metric,
                        const SearchBudget& budget, std::uint64_t seed,
                        const SearchOptions& opts = {});

}  // namespace clams
