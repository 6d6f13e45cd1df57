#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlclarity/types.hpp"

namespace rlclarity {

// Per-group outcome statistics: length-normalized scores aligned with the
// records, cluster means over the verdict partition, and the pass rate.
struct GroupScoreSummary {
  std::vector<double> scores;
  std::optional<double> p_pos_mean;
  std::optional<double> p_neg_mean;
  double pass_rate = 0.0;
};

// Length-normalized sequence score: exp of the mean token logprob, i.e. the
// geometric mean of the token probabilities. Evaluated entirely in log
// space so sequences of thousands of sub-unity probabilities cannot
// underflow. Result is in (0, 1] for legal inputs.
double sequence_prob(std::span<const double> token_logprobs);

GroupScoreSummary summarize_group(const RolloutGroup& group);

// Overlap analysis between two per-query pass-rate maps. "Solvable" means
// pass rate > 0; the shared set holds queries solvable under both maps.
struct IntersectionReport {
  std::vector<std::string> shared_queries;        // sorted
  std::vector<std::pair<double, double>> pairs;   // (rho_a, rho_b), aligned
  double fraction_of_a_solvable = 0.0;
  double fraction_of_b_solvable = 0.0;
  double below_diagonal_fraction = 0.0;           // rho_a > rho_b among pairs
};

IntersectionReport intersection_stats(const std::map<std::string, double>& a,
                                      const std::map<std::string, double>& b);

}  // namespace rlclarity
