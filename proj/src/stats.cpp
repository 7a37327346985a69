#include "clams/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clams/parallel.hpp"
#include "clams/rng.hpp"

namespace clams {

RopePosterior rope_signed_rank(const std::vector<double>& scores_a,
                               const std::vector<double>& scores_b, double rope, int mc_samples,
                               std::uint64_t seed) {
  if (scores_a.size() != scores_b.size()) throw std::invalid_argument("rope: length mismatch");
  if (scores_a.size() < 2) throw std::invalid_argument("rope: need at least 2 paired scores");
  if (rope < 0) throw std::invalid_argument("rope: rope width must be >= 0");

  // Differences augmented with the prior pseudo-observation z_0 = 0.
  std::vector<double> z;
  z.reserve(scores_a.size() + 1);
  z.push_back(0.0);
  for (std::size_t i = 0; i < scores_a.size(); ++i) z.push_back(scores_a[i] - scores_b[i]);
  const std::size_t n = z.size();
  const double bound = 2.0 * rope;

  long wins_left = 0, wins_rope = 0, wins_right = 0;
  Rng rng(Rng::splitmix(seed ^ 0x10beULL));
  std::vector<double> w(n);
  for (int s = 0; s < mc_samples; ++s) {
    // Dirichlet(1,...,1) via normalized exponentials.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double u = 0.0;
      while (u <= 0.0) u = rng.uniform();
      w[i] = -std::log(u);
      total += w[i];
    }
    for (std::size_t i = 0; i < n; ++i) w[i] /= total;

    double mass_left = 0.0, mass_rope = 0.0, mass_right = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double pair_sum = z[i] + z[j];
        const double wij = w[i] * w[j];
        if (pair_sum > bound)
          mass_left += wij;  // first argument better
        else if (pair_sum < -bound)
          mass_right += wij;
        else if (rope == 0.0 && pair_sum == 0.0) {
          // degenerate rope: split exact ties between the two sides
          mass_left += 0.5 * wij;
          mass_right += 0.5 * wij;
        } else
          mass_rope += wij;
      }
    }
    if (mass_left >= mass_rope && mass_left >= mass_right)
      ++wins_left;
    else if (mass_right >= mass_rope && mass_right > mass_left)
      ++wins_right;
    else
      ++wins_rope;
  }

  RopePosterior post;
  post.p_left = static_cast<double>(wins_left) / mc_samples;
  post.p_rope = static_cast<double>(wins_rope) / mc_samples;
  post.p_right = static_cast<double>(wins_right) / mc_samples;
  post.rope_width = rope;
  post.mc_samples = mc_samples;
  return post;
}

namespace {

// Studentized-range q_alpha / sqrt(2) at alpha = 0.05, k = 2..20.
constexpr double kNemenyiQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                  3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                  3.426, 3.458, 3.489, 3.517, 3.544};

}  // namespace

CdResult critical_difference_ranks(const ScoreTable& table) {
  const auto n_datasets = table.values.rows();
  const auto k = table.values.cols();
  if (k < 2 || n_datasets < 2)
    throw std::invalid_argument("critical_difference_ranks: need >= 2 methods and >= 2 datasets");
  if (!table.values.allFinite())
    throw std::invalid_argument("critical_difference_ranks: table has missing cells");

  // Per-dataset ranks, rank 1 = best score; ties get average ranks.
  Matrix ranks(n_datasets, k);
  for (Eigen::Index d = 0; d < n_datasets; ++d) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return table.values(d, a) > table.values(d, b); });
    Eigen::Index i = 0;
    while (i < k) {
      Eigen::Index j = i;
      while (j + 1 < k &&
             table.values(d, order[static_cast<std::size_t>(j + 1)]) ==
                 table.values(d, order[static_cast<std::size_t>(i)]))
        ++j;
      const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (Eigen::Index t = i; t <= j; ++t)
        ranks(d, order[static_cast<std::size_t>(t)]) = avg_rank;
      i = j + 1;
    }
  }

  CdResult res;
  const Vector avg = ranks.colwise().mean();
  for (Eigen::Index j = 0; j < k; ++j)
    res.average_ranks.emplace_back(table.methods[static_cast<std::size_t>(j)], avg[j]);

  const double N = static_cast<double>(n_datasets);
  const double K = static_cast<double>(k);
  double sum_r2 = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) sum_r2 += avg[j] * avg[j];
  res.friedman_statistic = 12.0 * N / (K * (K + 1.0)) * (sum_r2 - K * (K + 1.0) * (K + 1.0) / 4.0);

  const int qi = std::min<int>(static_cast<int>(k), 20) - 2;
  res.cd_alpha05 = kNemenyiQ05[qi] * std::sqrt(K * (K + 1.0) / (6.0 * N));
  return res;
}

ScoreTable score_table_from_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty scores CSV");
  ScoreTable t;
  {
    std::istringstream hs(line);
    std::string cell;
    bool first = true;
    while (std::getline(hs, cell, ',')) {
      if (first) {
        first = false;  // corner cell: dataset-name column header
        continue;
      }
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      t.methods.push_back(cell);
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    t.datasets.push_back(cell);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.methods.size()) throw std::runtime_error("ragged scores CSV row");
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.methods.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

}  // namespace clams
