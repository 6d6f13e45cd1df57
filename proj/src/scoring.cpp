#include "rlclarity/scoring.hpp"

#include <cmath>
#include <numeric>

namespace rlclarity {

double sequence_prob(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) {
    throw Error(errc::empty_sequence, "sequence_prob on empty logprob list");
  }
  const double sum =
      std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
  return std::exp(sum / static_cast<double>(token_logprobs.size()));
}

GroupScoreSummary summarize_group(const RolloutGroup& group) {
  GroupScoreSummary summary;
  summary.scores.reserve(group.size());
  double pos_sum = 0.0, neg_sum = 0.0;
  std::size_t pos_count = 0, neg_count = 0;
  for (const RolloutRecord& record : group.records) {
    const double score = sequence_prob(record.token_logprobs);
    summary.scores.push_back(score);
    if (record.correct) {
      pos_sum += score;
      ++pos_count;
    } else {
      neg_sum += score;
      ++neg_count;
    }
  }
  if (pos_count > 0) summary.p_pos_mean = pos_sum / static_cast<double>(pos_count);
  if (neg_count > 0) summary.p_neg_mean = neg_sum / static_cast<double>(neg_count);
  summary.pass_rate =
      static_cast<double>(pos_count) / static_cast<double>(group.size());
  return summary;
}

IntersectionReport intersection_stats(const std::map<std::string, double>& a,
                                      const std::map<std::string, double>& b) {
  if (a.empty() || b.empty()) {
    throw Error(errc::empty_input, "intersection_stats needs two non-empty maps");
  }
  IntersectionReport report;
  std::size_t solvable_a = 0, solvable_b = 0, below = 0;
  for (const auto& [query, rho] : a) {
    if (rho > 0.0) ++solvable_a;
  }
  for (const auto& [query, rho] : b) {
    if (rho > 0.0) ++solvable_b;
  }
  for (const auto& [query, rho_a] : a) {
    if (rho_a <= 0.0) continue;
    auto it = b.find(query);
    if (it == b.end() || it->second <= 0.0) continue;
    report.shared_queries.push_back(query);
    report.pairs.emplace_back(rho_a, it->second);
    if (rho_a > it->second) ++below;
  }
  const std::size_t shared = report.shared_queries.size();
  if (solvable_a > 0) {
    report.fraction_of_a_solvable =
        static_cast<double>(shared) / static_cast<double>(solvable_a);
  }
  if (solvable_b > 0) {
    report.fraction_of_b_solvable =
        static_cast<double>(shared) / static_cast<double>(solvable_b);
  }
  if (shared > 0) {
    report.below_diagonal_fraction =
        static_cast<double>(below) / static_cast<double>(shared);
  }
  return report;
}

}  // namespace rlclarity
