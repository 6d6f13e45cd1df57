#include "rlclarity/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rlclarity/rng.hpp"

namespace rlclarity {

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Silhouette: return "silhouette";
    case PolicyKind::Fisher: return "fisher";
    case PolicyKind::SeparationOnly: return "separation";
    case PolicyKind::PassRate: return "passrate";
    case PolicyKind::Random: return "random";
    case PolicyKind::None: return "none";
  }
  return "none";
}

std::optional<PolicyKind> policy_kind_from_name(const std::string& name) {
  if (name == "silhouette") return PolicyKind::Silhouette;
  if (name == "fisher") return PolicyKind::Fisher;
  if (name == "separation") return PolicyKind::SeparationOnly;
  if (name == "passrate") return PolicyKind::PassRate;
  if (name == "random") return PolicyKind::Random;
  if (name == "none") return PolicyKind::None;
  return std::nullopt;
}

WeightPolicy default_policy(PolicyKind kind) {
  WeightPolicy policy;
  policy.kind = kind;
  if (kind == PolicyKind::Fisher) {
    policy.beta = 0.01;
    policy.clamp = {0.95, 1.05};
  }
  return policy;
}

AdvantageVector grpo_advantage(std::span<const double> rewards) {
  if (rewards.empty()) throw Error(errc::empty_rewards, "empty reward vector");
  const double n = static_cast<double>(rewards.size());
  const double mean =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double sd = std::sqrt(var);

  // Constant rewards are degenerate even when the accumulated mean picks up
  // rounding noise, so test the values directly rather than sd alone.
  const bool constant =
      std::all_of(rewards.begin(), rewards.end(),
                  [&](double r) { return r == rewards[0]; });

  AdvantageVector out;
  out.values.resize(rewards.size());
  if (constant || sd == 0.0) {
    out.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.values[i] = (rewards[i] - mean) / sd;
  }
  return out;
}

namespace {

double clamp_weight(double w, const std::optional<std::pair<double, double>>& clamp) {
  if (!clamp) return w;
  return std::clamp(w, clamp->first, clamp->second);
}

}  // namespace

double weight(const ClarityReport& report, const WeightPolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::None:
      return 1.0;
    case PolicyKind::Silhouette: {
      if (!report.s_rect) return 1.0;
      return clamp_weight(std::exp(-policy.beta * *report.s_rect), policy.clamp);
    }
    case PolicyKind::Fisher: {
      if (!report.fisher_rect) return 1.0;
      return clamp_weight(std::exp(-policy.beta * *report.fisher_rect),
                          policy.clamp);
    }
    case PolicyKind::SeparationOnly: {
      if (!report.p_pos_mean || !report.p_neg_mean) return 1.0;
      const double gap = *report.p_pos_mean - *report.p_neg_mean;
      return clamp_weight(std::exp(-policy.beta * gap), policy.clamp);
    }
    case PolicyKind::PassRate: {
      const double centered = 2.0 * report.pass_rate - 1.0;
      return clamp_weight(std::exp(-policy.beta * centered), policy.clamp);
    }
    case PolicyKind::Random: {
      if (!policy.seed) {
        throw Error(errc::missing_seed, "random policy requires a seed");
      }
      const std::uint64_t qh = rng::fnv1a64(report.query_id);
      const double u = rng::uniform_sym(
          *policy.seed, static_cast<std::uint32_t>(qh),
          static_cast<std::uint32_t>(qh >> 32), 0, rng::kStreamPolicyWeight);
      return clamp_weight(std::exp(-policy.beta * u), policy.clamp);
    }
  }
  return 1.0;
}

AdvantageVector reweighted_advantage(const RolloutGroup& group,
                                     const ClarityReport& report,
                                     const WeightPolicy& policy) {
  std::vector<double> rewards;
  rewards.reserve(group.records.size());
  for (const auto& rec : group.records) rewards.push_back(rec.reward);
  AdvantageVector adv = grpo_advantage(rewards);
  const double w = weight(report, policy);
  for (double& a : adv.values) a *= w;
  return adv;
}

}  // namespace rlclarity
