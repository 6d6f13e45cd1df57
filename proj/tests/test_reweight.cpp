#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rlclarity/reweight.hpp"
#include "rlclarity/rng.hpp"

using namespace rlclarity;

namespace {

RolloutRecord reward_record(const std::string& rid, double reward,
                            bool correct) {
  RolloutRecord r;
  r.query_id = "q";
  r.response_id = rid;
  r.token_logprobs = {-1.0};
  r.correct = correct;
  r.reward = reward;
  return r;
}

RolloutGroup rewards_group(const std::vector<double>& rewards) {
  std::vector<RolloutRecord> records;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    records.push_back(reward_record("r" + std::to_string(i), rewards[i],
                                    rewards[i] >= 0.5));
  }
  return validate_group(std::move(records));
}

ClarityReport report_with(std::optional<double> s_rect,
                          std::optional<double> fisher_rect,
                          std::optional<double> p_pos,
                          std::optional<double> p_neg, double pass_rate) {
  ClarityReport report;
  report.query_id = "q";
  if (s_rect) {
    report.s = std::fabs(*s_rect);
    report.s_rect = s_rect;
  }
  if (fisher_rect) {
    report.fisher = std::fabs(*fisher_rect);
    report.fisher_rect = fisher_rect;
  }
  report.p_pos_mean = p_pos;
  report.p_neg_mean = p_neg;
  report.pass_rate = pass_rate;
  return report;
}

WeightPolicy policy_of(PolicyKind kind, double beta) {
  WeightPolicy policy = default_policy(kind);
  policy.beta = beta;
  return policy;
}

}  // namespace

TEST_CASE("policy kinds round-trip through their names") {
  for (PolicyKind kind :
       {PolicyKind::Silhouette, PolicyKind::Fisher, PolicyKind::SeparationOnly,
        PolicyKind::PassRate, PolicyKind::Random, PolicyKind::None}) {
    const auto parsed = policy_kind_from_name(policy_kind_name(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK(std::string(policy_kind_name(PolicyKind::SeparationOnly)) ==
        "separation");
  CHECK_FALSE(policy_kind_from_name("bogus").has_value());
  CHECK_FALSE(policy_kind_from_name("").has_value());
}

TEST_CASE("default_policy carries the stock hyperparameters") {
  const WeightPolicy sil = default_policy(PolicyKind::Silhouette);
  CHECK(sil.beta == 0.2);
  CHECK_FALSE(sil.clamp.has_value());

  const WeightPolicy fisher = default_policy(PolicyKind::Fisher);
  CHECK(fisher.beta == 0.01);
  REQUIRE(fisher.clamp.has_value());
  CHECK(fisher.clamp->first == 0.95);
  CHECK(fisher.clamp->second == 1.05);

  CHECK(default_policy(PolicyKind::PassRate).beta == 0.2);
  CHECK_FALSE(default_policy(PolicyKind::None).clamp.has_value());
}

TEST_CASE("grpo_advantage normalizes by the population moments") {
  const AdvantageVector a = grpo_advantage(std::vector<double>{1, 0, 0, 0});
  REQUIRE(a.values.size() == 4);
  CHECK_FALSE(a.degenerate);
  CHECK(a.values[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  for (int i = 1; i < 4; ++i) {
    CHECK(a.values[i] ==
          doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
  }
  CHECK(a.values[0] == doctest::Approx(1.732051).epsilon(1e-6));
  CHECK(a.values[1] == doctest::Approx(-0.577350).epsilon(1e-6));

  const AdvantageVector b = grpo_advantage(std::vector<double>{1, 0});
  CHECK(b.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.values[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("grpo_advantage flags zero-variance groups as degenerate") {
  for (const std::vector<double>& rewards :
       {std::vector<double>{1, 1, 1, 1}, std::vector<double>{0, 0},
        std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1}}) {
    const AdvantageVector a = grpo_advantage(rewards);
    CHECK(a.degenerate);
    for (double v : a.values) CHECK(v == 0.0);
  }
}

TEST_CASE("grpo_advantage rejects empty input") {
  try {
    grpo_advantage(std::vector<double>{});
    FAIL("expected EmptyRewards");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_rewards);
  }
}

TEST_CASE("grpo_advantage has zero mean and unit std on graded rewards") {
  const std::vector<double> rewards = {1.0, 0.75, 0.25, 0.0, 0.5};
  const AdvantageVector a = grpo_advantage(rewards);
  double mean = 0.0;
  for (double v : a.values) mean += v;
  mean /= static_cast<double>(a.values.size());
  double var = 0.0;
  for (double v : a.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(a.values.size());
  CHECK(std::fabs(mean) < 1e-12);
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("silhouette weight follows exp(-beta * S_rect)") {
  const WeightPolicy policy = policy_of(PolicyKind::Silhouette, 0.2);
  CHECK(weight(report_with(0.0, {}, 0.5, 0.5, 0.5), policy) == 1.0);
  CHECK(weight(report_with(-167.0 / 195.0, {}, 0.15, 0.85, 0.5), policy) ==
        doctest::Approx(1.1868254474574578).epsilon(1e-12));
  CHECK(weight(report_with(167.0 / 195.0, {}, 0.85, 0.15, 0.5), policy) ==
        doctest::Approx(std::exp(-0.2 * 167.0 / 195.0)).epsilon(1e-12));
  // Undefined S: neutral weight.
  CHECK(weight(report_with({}, {}, {}, {}, 1.0), policy) == 1.0);
}

TEST_CASE("silhouette weight amplifies inverted and attenuates clear queries") {
  const WeightPolicy policy = policy_of(PolicyKind::Silhouette, 0.2);
  CHECK(weight(report_with(-0.5, {}, 0.2, 0.8, 0.5), policy) > 1.0);
  CHECK(weight(report_with(0.5, {}, 0.8, 0.2, 0.5), policy) < 1.0);

  double previous = weight(report_with(-1.0, {}, 0.1, 0.9, 0.5), policy);
  for (int i = 1; i <= 40; ++i) {
    const double s = -1.0 + 2.0 * static_cast<double>(i) / 40.0;
    const double w =
        weight(report_with(s, {}, s >= 0 ? 0.9 : 0.1, s >= 0 ? 0.1 : 0.9, 0.5),
               policy);
    CHECK(w < previous);  // strictly decreasing in S'
    previous = w;
  }
}

TEST_CASE("fisher weight is clamped") {
  const WeightPolicy policy = default_policy(PolicyKind::Fisher);
  // exp(-0.01 * 98) = 0.3753... clips to the lower bound exactly.
  CHECK(weight(report_with({}, 98.0, 0.85, 0.15, 0.5), policy) == 0.95);
  CHECK(weight(report_with({}, -98.0, 0.15, 0.85, 0.5), policy) == 1.05);
  const double inside = weight(report_with({}, 2.0, 0.8, 0.2, 0.5), policy);
  CHECK(inside == doctest::Approx(std::exp(-0.02)).epsilon(1e-12));
  CHECK(inside >= 0.95);
  CHECK(inside <= 1.05);
  CHECK(weight(report_with({}, {}, {}, {}, 1.0), policy) == 1.0);
}

TEST_CASE("separation weight uses the rectified margin") {
  const WeightPolicy policy = policy_of(PolicyKind::SeparationOnly, 0.2);
  CHECK(weight(report_with({}, {}, 0.85, 0.15, 0.5), policy) ==
        doctest::Approx(std::exp(-0.14)).epsilon(1e-12));
  CHECK(weight(report_with({}, {}, 0.15, 0.85, 0.5), policy) ==
        doctest::Approx(std::exp(0.14)).epsilon(1e-12));
  // A missing mean neutralizes the policy.
  CHECK(weight(report_with({}, {}, 0.7, {}, 1.0), policy) == 1.0);
  CHECK(weight(report_with({}, {}, {}, 0.3, 0.0), policy) == 1.0);
}

TEST_CASE("pass-rate weight maps rho onto the symmetric exponent range") {
  const WeightPolicy policy = policy_of(PolicyKind::PassRate, 0.2);
  CHECK(weight(report_with({}, {}, 0.5, 0.5, 0.5), policy) == 1.0);
  CHECK(weight(report_with({}, {}, {}, 0.3, 0.25), policy) ==
        doctest::Approx(1.1051709180756477).epsilon(1e-12));
  CHECK(weight(report_with({}, {}, 0.7, {}, 1.0), policy) ==
        doctest::Approx(std::exp(-0.2)).epsilon(1e-12));
  CHECK(weight(report_with({}, {}, {}, 0.3, 0.0), policy) ==
        doctest::Approx(std::exp(0.2)).epsilon(1e-12));
}

TEST_CASE("random weight is reproducible and keyed by query id") {
  WeightPolicy policy = policy_of(PolicyKind::Random, 0.2);
  policy.seed = 7;
  ClarityReport report = report_with({}, {}, 0.5, 0.5, 0.5);
  report.query_id = "q01";
  const double w1 = weight(report, policy);
  CHECK(w1 == weight(report, policy));
  // Matches the counter-based stream directly.
  const std::uint64_t h = rng::fnv1a64("q01");
  const double u = rng::uniform_sym(7, static_cast<std::uint32_t>(h),
                                    static_cast<std::uint32_t>(h >> 32), 0,
                                    rng::kStreamPolicyWeight);
  CHECK(w1 == doctest::Approx(std::exp(-0.2 * u)).epsilon(1e-12));
  CHECK(w1 == doctest::Approx(0.9868447081096927).epsilon(1e-12));

  report.query_id = "q02";
  CHECK(weight(report, policy) != w1);

  WeightPolicy reseeded = policy;
  reseeded.seed = 8;
  report.query_id = "q01";
  CHECK(weight(report, reseeded) != w1);
}

TEST_CASE("random weight without a seed is an error") {
  const WeightPolicy policy = policy_of(PolicyKind::Random, 0.2);
  try {
    weight(report_with({}, {}, 0.5, 0.5, 0.5), policy);
    FAIL("expected MissingSeed");
  } catch (const Error& e) {
    CHECK(e.code() == errc::missing_seed);
  }
}

TEST_CASE("none policy is the identity weight") {
  const WeightPolicy policy = default_policy(PolicyKind::None);
  CHECK(weight(report_with(-0.9, 50.0, 0.1, 0.9, 0.25), policy) == 1.0);
  CHECK(weight(report_with({}, {}, {}, {}, 1.0), policy) == 1.0);
}

TEST_CASE("reweighted_advantage multiplies the advantages by w(q)") {
  const RolloutGroup group = rewards_group({1, 0, 0, 0});
  const ClarityReport report = report_with(-167.0 / 195.0, {}, 0.15, 0.85, 0.25);
  const WeightPolicy policy = policy_of(PolicyKind::Silhouette, 0.2);
  const AdvantageVector adv = reweighted_advantage(group, report, policy);
  REQUIRE(adv.values.size() == 4);
  CHECK_FALSE(adv.degenerate);
  CHECK(adv.values[0] == doctest::Approx(2.055641974711984).epsilon(1e-12));
  CHECK(adv.values[1] == doctest::Approx(-0.6852139915706614).epsilon(1e-12));
  CHECK(adv.values[2] == adv.values[1]);
  CHECK(adv.values[3] == adv.values[1]);
}

TEST_CASE("none policy reproduces the raw advantages exactly") {
  const RolloutGroup group = rewards_group({1, 0, 1, 0, 0});
  const ClarityReport report = report_with(0.4, {}, 0.8, 0.2, 0.4);
  const AdvantageVector raw = grpo_advantage(std::vector<double>{1, 0, 1, 0, 0});
  const AdvantageVector none =
      reweighted_advantage(group, report, default_policy(PolicyKind::None));
  REQUIRE(none.values.size() == raw.values.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    CHECK(none.values[i] == raw.values[i]);
  }
}

TEST_CASE("degenerate groups stay all-zero under every policy") {
  const RolloutGroup group = rewards_group({1, 1, 1});
  ClarityReport report = report_with({}, {}, 0.6, {}, 1.0);
  for (PolicyKind kind :
       {PolicyKind::Silhouette, PolicyKind::Fisher, PolicyKind::SeparationOnly,
        PolicyKind::PassRate, PolicyKind::Random, PolicyKind::None}) {
    WeightPolicy policy = default_policy(kind);
    policy.seed = 3;
    const AdvantageVector adv = reweighted_advantage(group, report, policy);
    CHECK(adv.degenerate);
    for (double v : adv.values) CHECK(v == 0.0);
  }
}

TEST_CASE("reweighting preserves signs and the zero mean") {
  const RolloutGroup group = rewards_group({1, 0.75, 0.25, 0, 0.5});
  const ClarityReport report = report_with(-0.6, {}, 0.2, 0.8, 0.4);
  const AdvantageVector raw =
      grpo_advantage(std::vector<double>{1, 0.75, 0.25, 0, 0.5});
  for (PolicyKind kind :
       {PolicyKind::Silhouette, PolicyKind::SeparationOnly, PolicyKind::PassRate}) {
    const AdvantageVector adv =
        reweighted_advantage(group, report, policy_of(kind, 0.2));
    double mean = 0.0;
    for (std::size_t i = 0; i < adv.values.size(); ++i) {
      mean += adv.values[i];
      CHECK(std::signbit(adv.values[i]) == std::signbit(raw.values[i]));
    }
    CHECK(std::fabs(mean) < 1e-12);
  }
}
