#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlclarity/reweight.hpp"
#include "rlclarity/types.hpp"

namespace rlclarity {

// Categorical one-step policy: a logit vector per query, probabilities by
// exponential normalization. Responses are single actions (L = 1), so a
// record's sequence score equals the action probability exactly.
struct ToyPolicy {
  std::vector<std::vector<double>> logits;

  std::size_t n_queries() const { return logits.size(); }
  std::vector<double> probs(std::size_t query) const;
};

std::vector<double> softmax(std::span<const double> logits);

// d pi[a] / d logit[b] = pi[a] * (delta(a, b) - pi[b]).
std::vector<double> softmax_jacobian_row(std::span<const double> probs,
                                         std::size_t a);

enum class Regime { Compact, Overlapping, Inverted };

const char* regime_name(Regime regime);

// Initial score landscape per query. Compact: correct actions sit one logit
// shelf above incorrect. Overlapping: shelves nearly coincide and jitter
// interleaves them. Inverted: incorrect actions sit above correct.
struct SimConfig {
  std::size_t n_queries = 12;
  std::size_t actions_per_query = 8;
  std::vector<std::vector<std::size_t>> correct_sets;  // per query
  std::vector<Regime> regimes;                         // per query
  std::size_t group_size = 16;
  std::size_t steps = 50;
  double learning_rate = 0.5;
  WeightPolicy policy;
  std::uint64_t seed = 1;
  double compact_offset = 2.0;
  double overlapping_offset = 0.25;
  double inverted_offset = -2.0;
  double jitter = 0.5;
};

// Fills correct_sets (first `correct_per_query` actions) and regimes
// (uniform, or round-robin over the three regimes when mixed=true).
void populate_queries(SimConfig& config, std::size_t correct_per_query,
                      std::optional<Regime> regime);

void validate_config(const SimConfig& config);

// key=value lines, '#' comments. Keys: n_queries, actions_per_query,
// correct_per_query, regime (compact|overlapping|inverted|mixed),
// group_size, steps, learning_rate, policy, beta, seed, compact_offset,
// overlapping_offset, inverted_offset, jitter. Unknown keys are errors.
SimConfig parse_sim_config(std::istream& in);
SimConfig parse_sim_config_file(const std::string& path);

// Regime-shaped logits with per-action jitter, all drawn from `seed`.
ToyPolicy init_policy(const SimConfig& config);

struct SimGroup {
  RolloutGroup group;
  std::vector<std::size_t> actions;  // parallel to group.records
  std::size_t query = 0;
};

// G action draws for one query; token_logprobs of each record is the single
// log-probability of its action, reward 1 iff the action is correct. Draws
// are keyed by (seed, step, query, slot).
SimGroup rollout(const ToyPolicy& policy, const SimConfig& config,
                 std::size_t query, std::uint32_t step);

struct GradStats {
  std::vector<double> query_grad_norm;  // l2 norm of each query's gradient
  std::vector<double> weights;          // w(q) applied per query
};

// One REINFORCE-with-group-baseline update: per query, reweighted
// advantages times the exact categorical Jacobian, summed over the group,
// scaled by lr. Returns the updated policy.
ToyPolicy grpo_step(const ToyPolicy& policy, std::span<const SimGroup> groups,
                    const WeightPolicy& weight_policy, double lr,
                    GradStats* stats = nullptr);

struct VarianceReport {
  double empirical = 0.0;  // variance of the per-group gradient statistic
  double analytic = 0.0;   // Var_pos[pi(1-pi)] + Var_neg[pi(1-pi)]
  std::optional<double> ratio;
  std::size_t groups_used = 0;
};

// Monte Carlo check of the gradient-variance relation for one query.
// Groups missing either verdict cluster are skipped; if every group is
// skipped the probe fails with insufficient_support.
VarianceReport variance_probe(const ToyPolicy& policy, const SimConfig& config,
                              std::size_t query, std::size_t n_trials);

struct StepRecord {
  std::size_t step = 0;
  std::optional<double> mean_s;  // rectified, over queries with defined S
  double mean_pass_rate = 0.0;
  double mean_w = 1.0;
  double mean_grad_norm = 0.0;
  double grad_var = 0.0;  // variance of per-query gradient norms
  std::vector<double> weights;
};

struct SimResult {
  std::vector<StepRecord> trajectory;
  ToyPolicy final_policy;
  std::vector<double> final_expected_pass;  // exact, from final_policy
  double mean_final_expected_pass = 0.0;
};

SimResult run_training(const SimConfig& config);

// CSV columns: step, mean_S, mean_pass_rate, mean_w, grad_var. mean_S is
// empty when no query had a defined silhouette that step.
void write_trajectory_csv(std::ostream& out,
                          std::span<const StepRecord> trajectory);

}  // namespace rlclarity
