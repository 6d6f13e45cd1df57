#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlclarity/clarity.hpp"
#include "rlclarity/types.hpp"

namespace rlclarity {

enum class PolicyKind {
  Silhouette,
  Fisher,
  SeparationOnly,
  PassRate,
  Random,
  None,
};

const char* policy_kind_name(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_name(const std::string& name);

// Advantage-reweighting strategy. `beta` scales the exponent; `clamp`
// bounds the weight (defaulted for Fisher, absent otherwise); `seed` feeds
// the Random policy's counter-based stream.
struct WeightPolicy {
  PolicyKind kind = PolicyKind::None;
  double beta = 0.2;
  std::optional<std::pair<double, double>> clamp;
  std::optional<std::uint64_t> seed;
};

// Policy with the stock hyperparameters for `kind`: beta 0.2 everywhere
// except Fisher (0.01), and clamp (0.95, 1.05) for Fisher only.
WeightPolicy default_policy(PolicyKind kind);

// Group-normalized advantages: (R_i - mean) / population std. A zero-std
// group is degenerate and yields all zeros.
struct AdvantageVector {
  std::vector<double> values;
  bool degenerate = false;
};

AdvantageVector grpo_advantage(std::span<const double> rewards);

// Query weight w(q) under `policy`:
//   Silhouette      exp(-beta * S'), 1 when S undefined
//   Fisher          clip(exp(-beta * F'), clamp), 1 when F undefined
//   SeparationOnly  exp(-beta * (p_pos_mean - p_neg_mean)), 1 when a mean
//                   is absent
//   PassRate        exp(-beta * (2 rho - 1))
//   Random          exp(-beta * u), u uniform on [-1, 1) keyed by
//                   (seed, query_id)
//   None            1
double weight(const ClarityReport& report, const WeightPolicy& policy);

// Element-wise product of the group-normalized advantages with w(q).
AdvantageVector reweighted_advantage(const RolloutGroup& group,
                                     const ClarityReport& report,
                                     const WeightPolicy& policy);

}  // namespace rlclarity
