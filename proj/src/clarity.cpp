#include "rlclarity/clarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace rlclarity {

namespace {

constexpr double kFisherEps = 1e-12;

void check_partition(std::size_t n, const VerdictPartition& partition) {
  std::vector<bool> seen(n, false);
  auto mark = [&](const std::vector<std::size_t>& indices) {
    for (std::size_t idx : indices) {
      if (idx >= n || seen[idx]) {
        throw Error(errc::partition_mismatch,
                    "partition does not cover the score indices exactly");
      }
      seen[idx] = true;
    }
  };
  mark(partition.pos_indices);
  mark(partition.neg_indices);
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(errc::partition_mismatch,
                "partition does not cover the score indices exactly");
  }
}

double mean_abs_distance(double value, std::span<const double> scores,
                         const std::vector<std::size_t>& cluster,
                         std::size_t skip, std::size_t denom) {
  double sum = 0.0;
  for (std::size_t idx : cluster) {
    if (idx == skip) continue;
    sum += std::abs(value - scores[idx]);
  }
  return sum / static_cast<double>(denom);
}

struct ClusterMoments {
  double mean = 0.0;
  double variance = 0.0;  // population
};

ClusterMoments moments(std::span<const double> scores,
                       const std::vector<std::size_t>& cluster) {
  ClusterMoments m;
  for (std::size_t idx : cluster) m.mean += scores[idx];
  m.mean /= static_cast<double>(cluster.size());
  for (std::size_t idx : cluster) {
    const double d = scores[idx] - m.mean;
    m.variance += d * d;
  }
  m.variance /= static_cast<double>(cluster.size());
  return m;
}

}  // namespace

SilhouetteResult silhouette(std::span<const double> scores,
                            const VerdictPartition& partition) {
  if (scores.empty()) {
    throw Error(errc::partition_mismatch, "silhouette on empty score list");
  }
  check_partition(scores.size(), partition);

  SilhouetteResult result;
  if (partition.pos_indices.empty() || partition.neg_indices.empty()) {
    return result;  // one cluster empty: S undefined
  }

  result.defined = true;
  result.per_sample.assign(scores.size(), 0.0);
  const std::vector<std::size_t>* clusters[2] = {&partition.pos_indices,
                                                 &partition.neg_indices};
  for (int c = 0; c < 2; ++c) {
    const auto& same = *clusters[c];
    const auto& opposite = *clusters[1 - c];
    for (std::size_t idx : same) {
      if (same.size() < 2) continue;  // singleton convention: s_i = 0
      const double a_i =
          mean_abs_distance(scores[idx], scores, same, idx, same.size() - 1);
      const double b_i = mean_abs_distance(scores[idx], scores, opposite,
                                           scores.size(), opposite.size());
      const double denom = std::max(a_i, b_i);
      result.per_sample[idx] = denom == 0.0 ? 0.0 : (b_i - a_i) / denom;
    }
  }
  double total = 0.0;
  for (double s : result.per_sample) total += s;
  result.s_mean = total / static_cast<double>(result.per_sample.size());
  return result;
}

double rectify_silhouette(double s_mean, double p_pos_mean, double p_neg_mean) {
  return p_pos_mean >= p_neg_mean ? s_mean : -std::abs(s_mean);
}

std::optional<double> fisher_ratio(std::span<const double> scores,
                                   const VerdictPartition& partition) {
  if (scores.empty()) {
    throw Error(errc::partition_mismatch, "fisher_ratio on empty score list");
  }
  check_partition(scores.size(), partition);
  if (partition.pos_indices.empty() || partition.neg_indices.empty()) {
    return std::nullopt;
  }
  const ClusterMoments pos = moments(scores, partition.pos_indices);
  const ClusterMoments neg = moments(scores, partition.neg_indices);
  const double gap = pos.mean - neg.mean;
  return gap * gap / (pos.variance + neg.variance + kFisherEps);
}

double rectify_fisher(double fisher, double p_pos_mean, double p_neg_mean) {
  return p_pos_mean >= p_neg_mean ? fisher : -fisher;
}

ClarityReport clarity_report(const RolloutGroup& group) {
  ClarityReport report;
  report.query_id = group.query_id;

  const GroupScoreSummary summary = summarize_group(group);
  report.pass_rate = summary.pass_rate;
  report.p_pos_mean = summary.p_pos_mean;
  report.p_neg_mean = summary.p_neg_mean;

  const VerdictPartition partition = partition_by_verdict(group);
  const SilhouetteResult sil = silhouette(summary.scores, partition);
  if (sil.defined) {
    report.s = sil.s_mean;
    report.s_rect =
        rectify_silhouette(*sil.s_mean, *summary.p_pos_mean, *summary.p_neg_mean);
  }
  if (auto fisher = fisher_ratio(summary.scores, partition)) {
    report.fisher = fisher;
    report.fisher_rect =
        rectify_fisher(*fisher, *summary.p_pos_mean, *summary.p_neg_mean);
  }
  return report;
}

ClarityBins bin_by_clarity(std::span<const ClarityReport> reports) {
  ClarityBins bins;
  double sum_high = 0.0, sum_low = 0.0, sum_zero = 0.0;
  for (const ClarityReport& report : reports) {
    if (!report.s.has_value()) {
      ++bins.n_undefined;
      continue;
    }
    if (*report.s > 0.0) {
      ++bins.n_high;
      sum_high += report.pass_rate;
    } else if (*report.s < 0.0) {
      ++bins.n_low;
      sum_low += report.pass_rate;
    } else {
      ++bins.n_zero;
      sum_zero += report.pass_rate;
    }
  }
  if (bins.n_high > 0) bins.mean_rho_high = sum_high / static_cast<double>(bins.n_high);
  if (bins.n_low > 0) bins.mean_rho_low = sum_low / static_cast<double>(bins.n_low);
  if (bins.n_zero > 0) bins.mean_rho_zero = sum_zero / static_cast<double>(bins.n_zero);
  return bins;
}

}  // namespace rlclarity
