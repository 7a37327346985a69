#include <algorithm>
#include <chrono>
#include <cmath>

#include "clams/parallel.hpp"
#include "clams/search.hpp"

namespace clams {

namespace {

using Clock = std::chrono::steady_clock;

struct BudgetTracker {
  const SearchBudget& budget;
  Clock::time_point start = Clock::now();
  int evals = 0;

  bool exhausted() const {
    if (budget.max_evaluations && evals >= *budget.max_evaluations) return true;
    if (budget.wall_time_s) {
      const double t = std::chrono::duration<double>(Clock::now() - start).count();
      if (t >= *budget.wall_time_s) return true;
    }
    return false;
  }
  int remaining_evals() const {
    return budget.max_evaluations ? *budget.max_evaluations - evals
                                  : std::numeric_limits<int>::max();
  }
};

// Seeded row subsample for fidelity < 1; labels follow rows.
Dataset subsample(const Dataset& d, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return d;
  const auto n = d.n();
  const auto keep = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n))));
  Rng rng(Rng::splitmix(seed ^ 0xf1de11ULL));
  const auto idx = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                  static_cast<std::size_t>(keep));
  Dataset s;
  s.name = d.name;
  s.vectorized = d.vectorized;
  s.rows.resize(static_cast<Eigen::Index>(idx.size()), d.dims());
  if (d.labels) s.labels.emplace();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s.rows.row(static_cast<Eigen::Index>(i)) = d.rows.row(static_cast<Eigen::Index>(idx[i]));
    if (d.labels) s.labels->push_back((*d.labels)[idx[i]]);
  }
  return s;
}

HistoryEntry timed_eval(const Pipeline& p, const Dataset& d, CviMetric metric, double timeout_s,
                        double fidelity) {
  const auto t0 = Clock::now();
  EvalOutcome out = evaluate_pipeline(p, d, metric, timeout_s);
  HistoryEntry e;
  e.pipeline = p;
  e.outcome = std::move(out);
  e.duration_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  e.fidelity = fidelity;
  return e;
}

// Parallel evaluation of a batch; results keep submission order so a fixed
// seed with threads = 1 or N yields the same history for batch strategies.
std::vector<HistoryEntry> eval_batch(const std::vector<std::pair<Pipeline, double>>& jobs,
                                     const Dataset& d, CviMetric metric, double timeout_s,
                                     std::uint64_t seed, int threads) {
  std::vector<HistoryEntry> out(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& [p, fidelity] = jobs[i];
    const Dataset view = fidelity < 1.0 ? subsample(d, fidelity, seed) : d;
    out[i] = timed_eval(p, view, metric, timeout_s, fidelity);
  });
  return out;
}

// Best-by-score with earliest-evaluated tie break; full-fidelity entries only.
int best_index(const std::vector<HistoryEntry>& history) {
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].fidelity < 1.0) continue;
    const double f = eval_fitness(history[i].outcome);
    if (std::isfinite(f) && f > best_score) {
      best_score = f;
      best = static_cast<int>(i);
    }
  }
  return best;
}

SearchResult finalize(std::vector<HistoryEntry> history, Optimizer opt, std::uint64_t seed) {
  const int bi = best_index(history);
  if (bi < 0) throw NoValidPipeline("no valid pipeline found within budget");
  SearchResult r;
  r.best_pipeline = history[static_cast<std::size_t>(bi)].pipeline;
  r.best_score = std::get<Score>(history[static_cast<std::size_t>(bi)].outcome);
  r.history = std::move(history);
  r.seed = seed;
  r.optimizer = opt;
  return r;
}

}  // namespace

SearchResult random_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                           std::uint64_t seed, const SearchOptions& opts) {
  if (!budget.valid()) throw std::invalid_argument("invalid search budget");
  Rng rng(Rng::splitmix(seed ^ 0x5253ULL));
  const int dims = static_cast<int>(d.dims());
  BudgetTracker tracker{budget};
  std::vector<HistoryEntry> history;

  while (!tracker.exhausted()) {
    const int batch = std::max(1, std::min(opts.threads, tracker.remaining_evals()));
    std::vector<std::pair<Pipeline, double>> jobs;
    for (int i = 0; i < batch; ++i) jobs.emplace_back(sample_pipeline(rng, dims), 1.0);
    for (auto& e : eval_batch(jobs, d, metric, budget.per_eval_timeout_s, seed, opts.threads))
      history.push_back(std::move(e));
    tracker.evals += batch;
  }
  return finalize(std::move(history), Optimizer::random, seed);
}

SearchResult asha_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                         std::uint64_t seed, const SearchOptions& opts) {
  if (!budget.valid()) throw std::invalid_argument("invalid search budget");
  if (opts.reduction_factor < 2) throw std::invalid_argument("asha: reduction_factor must be >= 2");
  Rng rng(Rng::splitmix(seed ^ 0xa54aULL));
  const int dims = static_cast<int>(d.dims());

  // Geometric rung schedule min_fraction * r^j, capped at full fidelity.
  std::vector<double> rungs;
  for (double f = opts.min_fraction; f < 1.0; f *= opts.reduction_factor) rungs.push_back(f);
  rungs.push_back(1.0);
  const int n_rungs = static_cast<int>(rungs.size());

  struct Config {
    Pipeline pipeline;
    int rung = 0;               // highest completed rung
    double score = -std::numeric_limits<double>::infinity();
    bool promoted = false;      // promotion from current rung already issued
  };
  std::vector<Config> configs;
  BudgetTracker tracker{budget};
  std::vector<HistoryEntry> history;

  // One in-flight job at a time per slot; decisions use completed results
  // only, so promotion never exceeds top-1/r of each rung.
  auto pick_job = [&]() -> std::pair<int, int> {  // (config index, rung to run)
    for (int rung = n_rungs - 2; rung >= 0; --rung) {
      std::vector<int> done;
      for (std::size_t i = 0; i < configs.size(); ++i)
        if (configs[i].rung == rung && std::isfinite(configs[i].score)) done.push_back(static_cast<int>(i));
      if (done.empty()) continue;
      const int quota = static_cast<int>(done.size()) / opts.reduction_factor;
      std::sort(done.begin(), done.end(),
                [&](int x, int y) { return configs[static_cast<std::size_t>(x)].score > configs[static_cast<std::size_t>(y)].score; });
      for (int rank = 0; rank < quota; ++rank) {
        Config& c = configs[static_cast<std::size_t>(done[static_cast<std::size_t>(rank)])];
        if (!c.promoted) {
          c.promoted = true;
          return {done[static_cast<std::size_t>(rank)], rung + 1};
        }
      }
    }
    configs.push_back({sample_pipeline(rng, dims), 0, -std::numeric_limits<double>::infinity(), false});
    return {static_cast<int>(configs.size()) - 1, 0};
  };

  while (!tracker.exhausted()) {
    const int batch = std::max(1, std::min(opts.threads, tracker.remaining_evals()));
    std::vector<std::pair<int, int>> picks;
    std::vector<std::pair<Pipeline, double>> jobs;
    for (int i = 0; i < batch; ++i) {
      auto [ci, rung] = pick_job();
      picks.emplace_back(ci, rung);
      jobs.emplace_back(configs[static_cast<std::size_t>(ci)].pipeline, rungs[static_cast<std::size_t>(rung)]);
    }
    auto results = eval_batch(jobs, d, metric, budget.per_eval_timeout_s,
                              seed + static_cast<std::uint64_t>(tracker.evals), opts.threads);
    for (std::size_t i = 0; i < results.size(); ++i) {
      auto [ci, rung] = picks[i];
      Config& c = configs[static_cast<std::size_t>(ci)];
      c.rung = rung;
      c.score = eval_fitness(results[i].outcome);
      c.promoted = false;
      history.push_back(std::move(results[i]));
    }
    tracker.evals += batch;
  }

  // Reported best must be a full-fidelity evaluation: re-evaluate the top
  // surviving config at fraction 1 if it has not reached it yet.
  int best_cfg = -1;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!std::isfinite(configs[i].score)) continue;
    if (best_cfg < 0 || configs[i].rung > configs[static_cast<std::size_t>(best_cfg)].rung ||
        (configs[i].rung == configs[static_cast<std::size_t>(best_cfg)].rung &&
         configs[i].score > configs[static_cast<std::size_t>(best_cfg)].score))
      best_cfg = static_cast<int>(i);
  }
  if (best_cfg >= 0 && configs[static_cast<std::size_t>(best_cfg)].rung < n_rungs - 1) {
    history.push_back(timed_eval(configs[static_cast<std::size_t>(best_cfg)].pipeline, d, metric,
                                 budget.per_eval_timeout_s, 1.0));
  }
  return finalize(std::move(history), Optimizer::asha, seed);
}

SearchResult evolution_search(const Dataset& d, CviMetric metric, const SearchBudget& budget,
                              std::uint64_t seed, const SearchOptions& opts) {
  if (!budget.valid()) throw std::invalid_argument("invalid search budget");
  if (opts.pop_size < 4) throw std::invalid_argument("evolution: pop_size must be >= 4");
  Rng rng(Rng::splitmix(seed ^ 0xe70ULL));
  const int dims = static_cast<int>(d.dims());
  BudgetTracker tracker{budget};
  std::vector<HistoryEntry> history;

  struct Member {
    Pipeline pipeline;
    double fitness;
  };
  std::vector<Member> pop;

  auto tournament = [&]() -> const Pipeline& {
    int best = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(pop.size()) - 1));
    for (int t = 1; t < opts.tournament_size; ++t) {
      const int c = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(pop.size()) - 1));
      if (pop[static_cast<std::size_t>(c)].fitness > pop[static_cast<std::size_t>(best)].fitness)
        best = c;
    }
    return pop[static_cast<std::size_t>(best)].pipeline;
  };

  // Initial population (counts toward the evaluation budget).
  {
    std::vector<std::pair<Pipeline, double>> jobs;
    const int init = std::min(opts.pop_size, tracker.remaining_evals());
    for (int i = 0; i < init; ++i) jobs.emplace_back(sample_pipeline(rng, dims), 1.0);
    for (auto& e : eval_batch(jobs, d, metric, budget.per_eval_timeout_s, seed, opts.threads)) {
      pop.push_back({e.pipeline, eval_fitness(e.outcome)});
      history.push_back(std::move(e));
    }
    tracker.evals += init;
  }

  // Steady state: breed offspring, evaluate, evict the worst member.
  while (!tracker.exhausted() && !pop.empty()) {
    const int batch = std::max(1, std::min(opts.threads, tracker.remaining_evals()));
    std::vector<std::pair<Pipeline, double>> jobs;
    for (int i = 0; i < batch; ++i) {
      Pipeline offspring;
      if (rng.bernoulli(opts.p_cross)) {
        auto [c1, c2] = crossover_pipelines(tournament(), tournament());
        offspring = rng.bernoulli(0.5) ? c1 : c2;
      } else {
        offspring = mutate_pipeline(tournament(), rng, dims);
      }
      offspring.clusterer.seed = rng.next_u64();
      jobs.emplace_back(std::move(offspring), 1.0);
    }
    for (auto& e : eval_batch(jobs, d, metric, budget.per_eval_timeout_s, seed, opts.threads)) {
      const double fit = eval_fitness(e.outcome);
      auto worst = std::min_element(pop.begin(), pop.end(), [](const Member& a, const Member& b) {
        return a.fitness < b.fitness;
      });
      if (fit >= worst->fitness) *worst = {e.pipeline, fit};
      history.push_back(std::move(e));
    }
    tracker.evals += batch;
  }
  return finalize(std::move(history), Optimizer::evolution, seed);
}

SearchResult run_search(Optimizer opt, const Dataset& d, CviMetric metric,
                        const SearchBudget& budget, std::uint64_t seed,
                        const SearchOptions& opts) {
  switch (opt) {
    case Optimizer::random: return random_search(d, metric, budget, seed, opts);
    case Optimizer::asha: return asha_search(d, metric, budget, seed, opts);
    case Optimizer::evolution: return evolution_search(d, metric, budget, seed, opts);
  }
  throw std::invalid_argument("unknown optimizer");
}

}  // namespace clams
