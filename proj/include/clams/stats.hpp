#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clams/data.hpp"

namespace clams {

struct ScoreTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  Matrix values;  // datasets x methods
};

struct RopePosterior {
  double p_left = 0.0;  // first argument better
  double p_rope = 0.0;
  double p_right = 0.0;  // second argument better
  double rope_width = 0.0;
  int mc_samples = 0;
};

// Bayesian Wilcoxon signed-rank posterior by Dirichlet-weight Monte Carlo
// over differences a_i - b_i with a zero pseudo-observation.
RopePosterior rope_signed_rank(const std::vector<double>& scores_a,
                               const std::vector<double>& scores_b, double rope,
                               int mc_samples = 50000, std::uint64_t seed = 0);

struct CdResult {
  std::vector<std::pair<std::string, double>> average_ranks;  // store order
  double friedman_statistic = 0.0;
  double cd_alpha05 = 0.0;  // Nemenyi critical difference at alpha = 0.05
};

CdResult critical_difference_ranks(const ScoreTable& table);

ScoreTable score_table_from_csv(const std::string& content);

}  // namespace clams
