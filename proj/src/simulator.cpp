#include "rlclarity/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rlclarity/clarity.hpp"
#include "rlclarity/rng.hpp"

namespace rlclarity {

namespace {

// Keeps record log-probabilities finite when softmax underflows.
constexpr double kProbFloor = 1e-300;

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

std::string query_name(std::size_t query) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "q%03zu", query);
  return buf;
}

std::size_t draw_action(std::span<const double> probs, double u) {
  double cum = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cum += probs[a];
    if (u < cum) return a;
  }
  return probs.size() - 1;
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> softmax_jacobian_row(std::span<const double> probs,
                                         std::size_t a) {
  std::vector<double> row(probs.size());
  for (std::size_t b = 0; b < probs.size(); ++b) {
    row[b] = probs[a] * ((a == b ? 1.0 : 0.0) - probs[b]);
  }
  return row;
}

std::vector<double> ToyPolicy::probs(std::size_t query) const {
  if (query >= logits.size()) {
    throw Error(errc::invalid_argument, "query index out of range");
  }
  return softmax(logits[query]);
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::Compact: return "compact";
    case Regime::Overlapping: return "overlapping";
    case Regime::Inverted: return "inverted";
  }
  return "compact";
}

void populate_queries(SimConfig& config, std::size_t correct_per_query,
                      std::optional<Regime> regime) {
  if (correct_per_query == 0 || correct_per_query >= config.actions_per_query) {
    throw Error(errc::bad_config,
                "correct_per_query must leave at least one incorrect action");
  }
  config.correct_sets.assign(config.n_queries, {});
  config.regimes.assign(config.n_queries, Regime::Compact);
  static constexpr Regime kCycle[3] = {Regime::Compact, Regime::Overlapping,
                                       Regime::Inverted};
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    for (std::size_t a = 0; a < correct_per_query; ++a) {
      config.correct_sets[q].push_back(a);
    }
    config.regimes[q] = regime ? *regime : kCycle[q % 3];
  }
}

void validate_config(const SimConfig& config) {
  auto fail = [](const std::string& msg) {
    throw Error(errc::bad_config, msg);
  };
  if (config.n_queries == 0) fail("n_queries must be positive");
  if (config.actions_per_query < 2) fail("actions_per_query must be >= 2");
  if (config.group_size < 2) fail("group_size must be >= 2");
  if (!(std::isfinite(config.learning_rate)) || config.learning_rate <= 0.0) {
    fail("learning_rate must be positive and finite");
  }
  if (!std::isfinite(config.jitter) || config.jitter < 0.0) {
    fail("jitter must be non-negative and finite");
  }
  for (double off : {config.compact_offset, config.overlapping_offset,
                     config.inverted_offset}) {
    if (!std::isfinite(off)) fail("regime offsets must be finite");
  }
  if (config.correct_sets.size() != config.n_queries ||
      config.regimes.size() != config.n_queries) {
    fail("correct_sets and regimes must cover every query");
  }
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    const auto& set = config.correct_sets[q];
    if (set.empty()) fail("every query needs a correct action");
    if (set.size() >= config.actions_per_query) {
      fail("every query needs an incorrect action");
    }
    for (std::size_t a : set) {
      if (a >= config.actions_per_query) fail("correct action out of range");
    }
  }
  if (!std::isfinite(config.policy.beta)) fail("beta must be finite");
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(errc::bad_config, "bad integer for " + key + ": " + value);
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(errc::bad_config, "bad number for " + key + ": " + value);
  }
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

SimConfig parse_sim_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(errc::bad_config,
                  "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(errc::bad_config,
                  "line " + std::to_string(lineno) + ": expected key=value");
    }
    if (!kv.emplace(key, value).second) {
      throw Error(errc::bad_config, "duplicate key: " + key);
    }
  }

  SimConfig config;
  std::size_t correct_per_query = 2;
  std::optional<Regime> regime;  // absent = mixed
  bool mixed = true;
  std::optional<double> beta;
  PolicyKind kind = PolicyKind::None;

  for (const auto& [key, value] : kv) {
    if (key == "n_queries") {
      config.n_queries = parse_u64(key, value);
    } else if (key == "actions_per_query") {
      config.actions_per_query = parse_u64(key, value);
    } else if (key == "correct_per_query") {
      correct_per_query = parse_u64(key, value);
    } else if (key == "regime") {
      if (value == "mixed") {
        mixed = true;
      } else if (value == "compact") {
        regime = Regime::Compact;
        mixed = false;
      } else if (value == "overlapping") {
        regime = Regime::Overlapping;
        mixed = false;
      } else if (value == "inverted") {
        regime = Regime::Inverted;
        mixed = false;
      } else {
        throw Error(errc::bad_config, "unknown regime: " + value);
      }
    } else if (key == "group_size") {
      config.group_size = parse_u64(key, value);
    } else if (key == "steps") {
      config.steps = parse_u64(key, value);
    } else if (key == "learning_rate") {
      config.learning_rate = parse_f64(key, value);
    } else if (key == "policy") {
      auto parsed = policy_kind_from_name(value);
      if (!parsed) throw Error(errc::bad_config, "unknown policy: " + value);
      kind = *parsed;
    } else if (key == "beta") {
      beta = parse_f64(key, value);
    } else if (key == "seed") {
      config.seed = parse_u64(key, value);
    } else if (key == "compact_offset") {
      config.compact_offset = parse_f64(key, value);
    } else if (key == "overlapping_offset") {
      config.overlapping_offset = parse_f64(key, value);
    } else if (key == "inverted_offset") {
      config.inverted_offset = parse_f64(key, value);
    } else if (key == "jitter") {
      config.jitter = parse_f64(key, value);
    } else {
      throw Error(errc::bad_config, "unknown key: " + key);
    }
  }

  config.policy = default_policy(kind);
  if (beta) config.policy.beta = *beta;
  config.policy.seed = config.seed;
  populate_queries(config, correct_per_query, mixed ? std::nullopt : regime);
  validate_config(config);
  return config;
}

SimConfig parse_sim_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open config: " + path);
  return parse_sim_config(in);
}

ToyPolicy init_policy(const SimConfig& config) {
  ToyPolicy policy;
  policy.logits.resize(config.n_queries);
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    double gap = 0.0;
    switch (config.regimes[q]) {
      case Regime::Compact: gap = config.compact_offset; break;
      case Regime::Overlapping: gap = config.overlapping_offset; break;
      case Regime::Inverted: gap = config.inverted_offset; break;
    }
    const auto& correct = config.correct_sets[q];
    auto is_correct = [&](std::size_t a) {
      return std::find(correct.begin(), correct.end(), a) != correct.end();
    };
    policy.logits[q].resize(config.actions_per_query);
    for (std::size_t a = 0; a < config.actions_per_query; ++a) {
      const double base = is_correct(a) ? gap / 2.0 : -gap / 2.0;
      const double noise = rng::uniform_sym(
          config.seed, static_cast<std::uint32_t>(q),
          static_cast<std::uint32_t>(a), 0, rng::kStreamJitter);
      policy.logits[q][a] = base + config.jitter * noise;
    }
  }
  return policy;
}

SimGroup rollout(const ToyPolicy& policy, const SimConfig& config,
                 std::size_t query, std::uint32_t step) {
  const std::vector<double> probs = policy.probs(query);
  const auto& correct = config.correct_sets[query];
  auto is_correct = [&](std::size_t a) {
    return std::find(correct.begin(), correct.end(), a) != correct.end();
  };

  SimGroup out;
  out.query = query;
  out.group.query_id = query_name(query);
  out.actions.reserve(config.group_size);
  out.group.records.reserve(config.group_size);
  for (std::size_t slot = 0; slot < config.group_size; ++slot) {
    const double u = rng::u01(config.seed, step,
                              static_cast<std::uint32_t>(query),
                              static_cast<std::uint32_t>(slot),
                              rng::kStreamRollout);
    const std::size_t action = draw_action(probs, u);
    out.actions.push_back(action);

    RolloutRecord rec;
    rec.query_id = out.group.query_id;
    rec.response_id = "r" + std::to_string(slot);
    rec.token_logprobs = {std::log(std::max(probs[action], kProbFloor))};
    rec.correct = is_correct(action);
    rec.reward = rec.correct ? 1.0 : 0.0;
    out.group.records.push_back(std::move(rec));
  }
  return out;
}

ToyPolicy grpo_step(const ToyPolicy& policy, std::span<const SimGroup> groups,
                    const WeightPolicy& weight_policy, double lr,
                    GradStats* stats) {
  ToyPolicy updated = policy;
  if (stats) {
    stats->query_grad_norm.clear();
    stats->weights.clear();
  }
  for (const auto& sim_group : groups) {
    const ClarityReport report = clarity_report(sim_group.group);
    const AdvantageVector adv =
        reweighted_advantage(sim_group.group, report, weight_policy);
    const std::vector<double> probs = policy.probs(sim_group.query);
    const std::size_t n_actions = probs.size();

    std::vector<double> grad(n_actions, 0.0);
    for (std::size_t i = 0; i < sim_group.actions.size(); ++i) {
      const std::size_t a = sim_group.actions[i];
      const double coeff = adv.values[i] * probs[a];
      for (std::size_t b = 0; b < n_actions; ++b) {
        grad[b] += coeff * ((a == b ? 1.0 : 0.0) - probs[b]);
      }
    }
    for (std::size_t b = 0; b < n_actions; ++b) {
      updated.logits[sim_group.query][b] += lr * grad[b];
    }
    if (stats) {
      stats->query_grad_norm.push_back(l2_norm(grad));
      stats->weights.push_back(weight(report, weight_policy));
    }
  }
  return updated;
}

VarianceReport variance_probe(const ToyPolicy& policy, const SimConfig& config,
                              std::size_t query, std::size_t n_trials) {
  const std::vector<double> probs = policy.probs(query);
  const auto& correct = config.correct_sets[query];
  auto is_correct = [&](std::size_t a) {
    return std::find(correct.begin(), correct.end(), a) != correct.end();
  };

  double p_pos = 0.0;
  double p_neg = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    (is_correct(a) ? p_pos : p_neg) += probs[a];
  }
  if (p_pos <= 0.0 || p_neg <= 0.0) {
    throw Error(errc::insufficient_support,
                "query gives zero probability to a verdict cluster");
  }

  // Analytic predictor: variance of pi*(1-pi) under each conditional
  // action distribution, summed.
  auto conditional_variance = [&](bool want_correct, double mass) {
    double mean = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      if (is_correct(a) != want_correct) continue;
      mean += (probs[a] / mass) * probs[a] * (1.0 - probs[a]);
    }
    double var = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      if (is_correct(a) != want_correct) continue;
      const double x = probs[a] * (1.0 - probs[a]);
      var += (probs[a] / mass) * (x - mean) * (x - mean);
    }
    return var;
  };
  const double analytic =
      conditional_variance(true, p_pos) + conditional_variance(false, p_neg);

  std::vector<double> stats;
  stats.reserve(n_trials);
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    double sum_pos = 0.0;
    double sum_neg = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (std::size_t slot = 0; slot < config.group_size; ++slot) {
      const double u = rng::u01(config.seed,
                                static_cast<std::uint32_t>(trial),
                                static_cast<std::uint32_t>(query),
                                static_cast<std::uint32_t>(slot),
                                rng::kStreamProbe);
      const std::size_t a = draw_action(probs, u);
      const double x = probs[a] * (1.0 - probs[a]);
      if (is_correct(a)) {
        sum_pos += x;
        ++n_pos;
      } else {
        sum_neg += x;
        ++n_neg;
      }
    }
    if (n_pos == 0 || n_neg == 0) continue;
    stats.push_back(sum_pos / n_pos - sum_neg / n_neg);
  }
  if (stats.empty()) {
    throw Error(errc::insufficient_support,
                "no trial sampled both verdict clusters");
  }

  VarianceReport report;
  report.groups_used = stats.size();
  report.empirical = population_variance(stats);
  report.analytic = analytic;
  if (analytic > 0.0) report.ratio = report.empirical / analytic;
  return report;
}

SimResult run_training(const SimConfig& config_in) {
  SimConfig config = config_in;
  if (config.policy.kind == PolicyKind::Random && !config.policy.seed) {
    config.policy.seed = config.seed;
  }
  validate_config(config);

  SimResult result;
  result.final_policy = init_policy(config);
  result.trajectory.reserve(config.steps);

  for (std::size_t step = 0; step < config.steps; ++step) {
    std::vector<SimGroup> groups;
    groups.reserve(config.n_queries);
    for (std::size_t q = 0; q < config.n_queries; ++q) {
      groups.push_back(rollout(result.final_policy, config, q,
                               static_cast<std::uint32_t>(step)));
    }

    StepRecord rec;
    rec.step = step;
    double s_sum = 0.0;
    std::size_t s_count = 0;
    double pass_sum = 0.0;
    for (const auto& g : groups) {
      const ClarityReport report = clarity_report(g.group);
      if (report.s_rect) {
        s_sum += *report.s_rect;
        ++s_count;
      }
      pass_sum += report.pass_rate;
    }
    if (s_count > 0) rec.mean_s = s_sum / static_cast<double>(s_count);
    rec.mean_pass_rate = pass_sum / static_cast<double>(config.n_queries);

    GradStats stats;
    result.final_policy = grpo_step(result.final_policy, groups, config.policy,
                                    config.learning_rate, &stats);
    rec.weights = stats.weights;
    rec.mean_w =
        std::accumulate(stats.weights.begin(), stats.weights.end(), 0.0) /
        static_cast<double>(stats.weights.size());
    rec.mean_grad_norm = std::accumulate(stats.query_grad_norm.begin(),
                                         stats.query_grad_norm.end(), 0.0) /
                         static_cast<double>(stats.query_grad_norm.size());
    rec.grad_var = population_variance(stats.query_grad_norm);
    result.trajectory.push_back(std::move(rec));
  }

  result.final_expected_pass.resize(config.n_queries);
  double pass_total = 0.0;
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    const std::vector<double> probs = result.final_policy.probs(q);
    double pass = 0.0;
    for (std::size_t a : config.correct_sets[q]) pass += probs[a];
    result.final_expected_pass[q] = pass;
    pass_total += pass;
  }
  result.mean_final_expected_pass =
      pass_total / static_cast<double>(config.n_queries);
  return result;
}

void write_trajectory_csv(std::ostream& out,
                          std::span<const StepRecord> trajectory) {
  out << "step,mean_S,mean_pass_rate,mean_w,grad_var\n";
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& rec : trajectory) {
    out << rec.step << ',';
    if (rec.mean_s) out << fmt(*rec.mean_s);
    out << ',' << fmt(rec.mean_pass_rate) << ',' << fmt(rec.mean_w) << ','
        << fmt(rec.grad_var) << '\n';
  }
}

}  // namespace rlclarity
