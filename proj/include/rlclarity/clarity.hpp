#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlclarity/scoring.hpp"
#include "rlclarity/types.hpp"

namespace rlclarity {

// Silhouette analysis of a 1-D two-cluster partition of sequence scores.
// Undefined (defined == false) when either verdict cluster is empty, in
// which case per_sample is empty and s_mean is absent.
struct SilhouetteResult {
  std::vector<double> per_sample;  // s_i in [-1, 1], aligned with scores
  std::optional<double> s_mean;    // S, the unweighted mean of per_sample
  bool defined = false;
};

// Per-sample silhouette values over |score_i - score_j| distances:
//   a_i = mean distance to the other members of the own verdict cluster,
//   b_i = mean distance to the opposite cluster,
//   s_i = (b_i - a_i) / max(a_i, b_i).
// Conventions: members of a singleton cluster get s_i = 0 (a_i has no
// defining pairs), and s_i = 0 when max(a_i, b_i) == 0 (all scores in both
// clusters coincide; zero separation is ambiguity, not structure).
SilhouetteResult silhouette(std::span<const double> scores,
                            const VerdictPartition& partition);

// Sign-corrects S for inverted score landscapes: returns S when the correct
// cluster's mean probability is at least the incorrect cluster's, otherwise
// -|S|. Magnitude is always preserved.
double rectify_silhouette(double s_mean, double p_pos_mean, double p_neg_mean);

// Fisher Ratio F = (mu_pos - mu_neg)^2 / (var_pos + var_neg + eps) with
// population variances and eps = 1e-12; nullopt when either cluster is
// empty. Singleton clusters contribute zero variance.
std::optional<double> fisher_ratio(std::span<const double> scores,
                                   const VerdictPartition& partition);

// F when mu_pos >= mu_neg, else -F.
double rectify_fisher(double fisher, double p_pos_mean, double p_neg_mean);

// Per-query clarity bundle. Optional fields are absent exactly when the
// underlying quantity is undefined (one verdict cluster empty).
struct ClarityReport {
  std::string query_id;
  std::optional<double> s;            // S
  std::optional<double> s_rect;       // S'
  std::optional<double> fisher;       // F
  std::optional<double> fisher_rect;  // F'
  std::optional<double> p_pos_mean;
  std::optional<double> p_neg_mean;
  double pass_rate = 0.0;
};

ClarityReport clarity_report(const RolloutGroup& group);

// Count and mean pass rate of defined-S reports split into S > 0, S < 0 and
// S = 0 buckets; undefined-S reports are counted separately and excluded
// from every bucket.
struct ClarityBins {
  std::size_t n_high = 0;
  double mean_rho_high = 0.0;
  std::size_t n_low = 0;
  double mean_rho_low = 0.0;
  std::size_t n_zero = 0;
  double mean_rho_zero = 0.0;
  std::size_t n_undefined = 0;
};

ClarityBins bin_by_clarity(std::span<const ClarityReport> reports);

}  // namespace rlclarity
