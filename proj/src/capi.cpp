#include "rlclarity.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rlclarity/behavior.hpp"
#include "rlclarity/clarity.hpp"
#include "rlclarity/jsonl.hpp"
#include "rlclarity/reweight.hpp"
#include "rlclarity/scoring.hpp"
#include "rlclarity/simulator.hpp"
#include "rlclarity/types.hpp"

struct rlc_group {
  rlclarity::RolloutGroup impl;
};

struct rlc_dataset {
  std::vector<rlc_group> groups;
};

struct rlc_judge {
  std::unique_ptr<rlclarity::JudgeOracle> impl;
};

struct rlc_judge_cache {
  std::shared_ptr<rlclarity::JudgeCache> impl;
};

struct rlc_clusters {
  rlclarity::ClusterSet impl;
};

struct rlc_intersection {
  rlclarity::IntersectionReport impl;
};

struct rlc_sim_config {
  rlclarity::SimConfig impl;
};

struct rlc_sim_result {
  rlclarity::SimResult impl;
};

namespace {

thread_local std::string g_last_error;

rlc_status status_of(rlclarity::errc code) {
  using rlclarity::errc;
  switch (code) {
    case errc::empty_group: return RLC_E_EMPTY_GROUP;
    case errc::mixed_query_ids: return RLC_E_MIXED_QUERY_IDS;
    case errc::nonfinite_logprob: return RLC_E_NONFINITE_LOGPROB;
    case errc::positive_logprob: return RLC_E_POSITIVE_LOGPROB;
    case errc::invalid_reward: return RLC_E_INVALID_REWARD;
    case errc::empty_sequence: return RLC_E_EMPTY_SEQUENCE;
    case errc::partition_mismatch: return RLC_E_PARTITION_MISMATCH;
    case errc::empty_rewards: return RLC_E_EMPTY_REWARDS;
    case errc::missing_seed: return RLC_E_MISSING_SEED;
    case errc::unknown_code: return RLC_E_UNKNOWN_CODE;
    case errc::count_mismatch: return RLC_E_COUNT_MISMATCH;
    case errc::judge_failure: return RLC_E_JUDGE_FAILURE;
    case errc::parse_error: return RLC_E_PARSE;
    case errc::empty_input: return RLC_E_EMPTY_INPUT;
    case errc::io_error: return RLC_E_IO;
    case errc::insufficient_support: return RLC_E_INSUFFICIENT_SUPPORT;
    case errc::bad_config: return RLC_E_BAD_CONFIG;
    case errc::invalid_argument: return RLC_E_INVALID_ARGUMENT;
  }
  return RLC_E_UNKNOWN;
}

template <typename Fn>
rlc_status guard(Fn&& fn) {
  try {
    fn();
    return RLC_OK;
  } catch (const rlclarity::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RLC_E_UNKNOWN;
  }
}

rlc_status fail_arg(const char* message) {
  g_last_error = message;
  return RLC_E_INVALID_ARGUMENT;
}

rlc_status require(const void* p, const char* name) {
  if (p != nullptr) return RLC_OK;
  g_last_error = std::string(name) + " must not be NULL";
  return RLC_E_INVALID_ARGUMENT;
}

#define RLC_REQUIRE(p)                                    \
  do {                                                    \
    if (rlc_status s_ = require((p), #p)) return s_;      \
  } while (0)

const rlclarity::RolloutRecord* record_at(const rlc_group* group,
                                          size_t record) {
  if (group == nullptr || record >= group->impl.records.size()) return nullptr;
  return &group->impl.records[record];
}

rlclarity::WeightPolicy to_policy(const rlc_policy& p) {
  if (p.kind < 0 || p.kind > RLC_POLICY_NONE) {
    throw rlclarity::Error(rlclarity::errc::invalid_argument,
                           "unknown policy kind");
  }
  rlclarity::WeightPolicy out;
  out.kind = static_cast<rlclarity::PolicyKind>(p.kind);
  out.beta = p.beta;
  if (p.has_clamp) out.clamp = {p.clamp_lo, p.clamp_hi};
  if (p.has_seed) out.seed = p.seed;
  return out;
}

rlc_policy from_policy(const rlclarity::WeightPolicy& p) {
  rlc_policy out{};
  out.kind = static_cast<int>(p.kind);
  out.beta = p.beta;
  out.has_clamp = p.clamp.has_value();
  if (p.clamp) {
    out.clamp_lo = p.clamp->first;
    out.clamp_hi = p.clamp->second;
  }
  out.has_seed = p.seed.has_value();
  if (p.seed) out.seed = *p.seed;
  return out;
}

rlc_dataset* wrap_dataset(rlclarity::Dataset dataset) {
  auto* out = new rlc_dataset;
  out->groups.reserve(dataset.groups.size());
  for (auto& group : dataset.groups) {
    out->groups.push_back(rlc_group{std::move(group)});
  }
  return out;
}

}  // namespace

extern "C" {

const char* rlc_version(void) { return "0.1.0"; }

const char* rlc_last_error(void) { return g_last_error.c_str(); }

/* ---- datasets ------------------------------------------------------- */

rlc_status rlc_dataset_open(const char* path, rlc_dataset** out) {
  RLC_REQUIRE(path);
  RLC_REQUIRE(out);
  return guard([&] { *out = wrap_dataset(rlclarity::read_dataset_file(path)); });
}

rlc_status rlc_dataset_parse(const char* jsonl, rlc_dataset** out) {
  RLC_REQUIRE(jsonl);
  RLC_REQUIRE(out);
  return guard([&] {
    std::istringstream in{std::string(jsonl)};
    *out = wrap_dataset(rlclarity::read_dataset(in));
  });
}

void rlc_dataset_free(rlc_dataset* dataset) { delete dataset; }

rlc_status rlc_dataset_group_count(const rlc_dataset* dataset, size_t* out) {
  RLC_REQUIRE(dataset);
  RLC_REQUIRE(out);
  *out = dataset->groups.size();
  return RLC_OK;
}

rlc_status rlc_dataset_group(const rlc_dataset* dataset, size_t index,
                             const rlc_group** out) {
  RLC_REQUIRE(dataset);
  RLC_REQUIRE(out);
  if (index >= dataset->groups.size()) return fail_arg("group index out of range");
  *out = &dataset->groups[index];
  return RLC_OK;
}

rlc_status rlc_dataset_find(const rlc_dataset* dataset, const char* query_id,
                            const rlc_group** out) {
  RLC_REQUIRE(dataset);
  RLC_REQUIRE(query_id);
  RLC_REQUIRE(out);
  auto it = std::lower_bound(
      dataset->groups.begin(), dataset->groups.end(), query_id,
      [](const rlc_group& g, const char* id) { return g.impl.query_id < id; });
  if (it == dataset->groups.end() || it->impl.query_id != query_id) {
    return fail_arg("query_id not present in dataset");
  }
  *out = &*it;
  return RLC_OK;
}

const char* rlc_group_query_id(const rlc_group* group) {
  return group ? group->impl.query_id.c_str() : nullptr;
}

rlc_status rlc_group_size(const rlc_group* group, size_t* out) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(out);
  *out = group->impl.records.size();
  return RLC_OK;
}

const char* rlc_group_response_id(const rlc_group* group, size_t record) {
  const auto* rec = record_at(group, record);
  return rec ? rec->response_id.c_str() : nullptr;
}

rlc_status rlc_group_correct(const rlc_group* group, size_t record, int* out) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(out);
  const auto* rec = record_at(group, record);
  if (!rec) return fail_arg("record index out of range");
  *out = rec->correct ? 1 : 0;
  return RLC_OK;
}

rlc_status rlc_group_reward(const rlc_group* group, size_t record,
                            double* out) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(out);
  const auto* rec = record_at(group, record);
  if (!rec) return fail_arg("record index out of range");
  *out = rec->reward;
  return RLC_OK;
}

rlc_status rlc_group_logprobs(const rlc_group* group, size_t record,
                              const double** out, size_t* out_len) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(out);
  RLC_REQUIRE(out_len);
  const auto* rec = record_at(group, record);
  if (!rec) return fail_arg("record index out of range");
  *out = rec->token_logprobs.data();
  *out_len = rec->token_logprobs.size();
  return RLC_OK;
}

const char* rlc_group_text(const rlc_group* group, size_t record) {
  const auto* rec = record_at(group, record);
  return rec && rec->text ? rec->text->c_str() : nullptr;
}

const char* rlc_group_method_label(const rlc_group* group, size_t record) {
  const auto* rec = record_at(group, record);
  return rec && rec->method_label ? rec->method_label->c_str() : nullptr;
}

const char* rlc_group_error_code(const rlc_group* group, size_t record) {
  const auto* rec = record_at(group, record);
  return rec && rec->error_code ? rec->error_code->c_str() : nullptr;
}

const char* rlc_group_difficulty(const rlc_group* group, size_t record) {
  const auto* rec = record_at(group, record);
  return rec && rec->difficulty ? rec->difficulty->c_str() : nullptr;
}

/* ---- scoring -------------------------------------------------------- */

rlc_status rlc_sequence_prob(const double* logprobs, size_t n, double* out) {
  RLC_REQUIRE(out);
  if (n > 0) RLC_REQUIRE(logprobs);
  return guard([&] {
    *out = rlclarity::sequence_prob(std::span<const double>(logprobs, n));
  });
}

rlc_status rlc_group_scores(const rlc_group* group, double* buf,
                            size_t buflen) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(buf);
  if (buflen < group->impl.records.size()) return fail_arg("buffer too small");
  return guard([&] {
    const auto summary = rlclarity::summarize_group(group->impl);
    std::copy(summary.scores.begin(), summary.scores.end(), buf);
  });
}

/* ---- clarity -------------------------------------------------------- */

rlc_status rlc_clarity_report(const rlc_group* group, rlc_clarity* out) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(out);
  return guard([&] {
    const auto report = rlclarity::clarity_report(group->impl);
    *out = rlc_clarity{};
    out->s_defined = report.s.has_value();
    if (report.s) out->s = *report.s;
    out->s_rect_defined = report.s_rect.has_value();
    if (report.s_rect) out->s_rect = *report.s_rect;
    out->fisher_defined = report.fisher.has_value();
    if (report.fisher) out->fisher = *report.fisher;
    out->fisher_rect_defined = report.fisher_rect.has_value();
    if (report.fisher_rect) out->fisher_rect = *report.fisher_rect;
    out->p_pos_defined = report.p_pos_mean.has_value();
    if (report.p_pos_mean) out->p_pos_mean = *report.p_pos_mean;
    out->p_neg_defined = report.p_neg_mean.has_value();
    if (report.p_neg_mean) out->p_neg_mean = *report.p_neg_mean;
    out->pass_rate = report.pass_rate;
  });
}

rlc_status rlc_silhouette_samples(const rlc_group* group, double* buf,
                                  size_t buflen, size_t* out_len,
                                  int* out_defined) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(buf);
  RLC_REQUIRE(out_len);
  RLC_REQUIRE(out_defined);
  if (buflen < group->impl.records.size()) return fail_arg("buffer too small");
  return guard([&] {
    const auto summary = rlclarity::summarize_group(group->impl);
    const auto partition = rlclarity::partition_by_verdict(group->impl);
    const auto result = rlclarity::silhouette(summary.scores, partition);
    *out_defined = result.defined ? 1 : 0;
    *out_len = result.per_sample.size();
    std::copy(result.per_sample.begin(), result.per_sample.end(), buf);
  });
}

rlc_status rlc_dataset_bins(const rlc_dataset* dataset, rlc_bins* out) {
  RLC_REQUIRE(dataset);
  RLC_REQUIRE(out);
  return guard([&] {
    std::vector<rlclarity::ClarityReport> reports;
    reports.reserve(dataset->groups.size());
    for (const auto& group : dataset->groups) {
      reports.push_back(rlclarity::clarity_report(group.impl));
    }
    const auto bins = rlclarity::bin_by_clarity(reports);
    *out = rlc_bins{};
    out->n_high = bins.n_high;
    out->mean_rho_high_defined = bins.n_high > 0;
    out->mean_rho_high = bins.mean_rho_high;
    out->n_low = bins.n_low;
    out->mean_rho_low_defined = bins.n_low > 0;
    out->mean_rho_low = bins.mean_rho_low;
    out->n_zero = bins.n_zero;
    out->mean_rho_zero_defined = bins.n_zero > 0;
    out->mean_rho_zero = bins.mean_rho_zero;
    out->n_undefined = bins.n_undefined;
  });
}

/* ---- advantages ----------------------------------------------------- */

rlc_status rlc_policy_default(int kind, rlc_policy* out) {
  RLC_REQUIRE(out);
  if (kind < 0 || kind > RLC_POLICY_NONE) return fail_arg("unknown policy kind");
  *out = from_policy(
      rlclarity::default_policy(static_cast<rlclarity::PolicyKind>(kind)));
  return RLC_OK;
}

rlc_status rlc_policy_kind_from_name(const char* name, int* out) {
  RLC_REQUIRE(name);
  RLC_REQUIRE(out);
  const auto kind = rlclarity::policy_kind_from_name(name);
  if (!kind) return fail_arg("unknown policy name");
  *out = static_cast<int>(*kind);
  return RLC_OK;
}

const char* rlc_policy_kind_name(int kind) {
  if (kind < 0 || kind > RLC_POLICY_NONE) return nullptr;
  return rlclarity::policy_kind_name(static_cast<rlclarity::PolicyKind>(kind));
}

rlc_status rlc_grpo_advantage(const double* rewards, size_t n, double* out,
                              int* out_degenerate) {
  RLC_REQUIRE(out);
  RLC_REQUIRE(out_degenerate);
  if (n > 0) RLC_REQUIRE(rewards);
  return guard([&] {
    const auto adv =
        rlclarity::grpo_advantage(std::span<const double>(rewards, n));
    std::copy(adv.values.begin(), adv.values.end(), out);
    *out_degenerate = adv.degenerate ? 1 : 0;
  });
}

rlc_status rlc_weight(const rlc_group* group, const rlc_policy* policy,
                      double* out) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(policy);
  RLC_REQUIRE(out);
  return guard([&] {
    const auto report = rlclarity::clarity_report(group->impl);
    *out = rlclarity::weight(report, to_policy(*policy));
  });
}

rlc_status rlc_reweighted_advantage(const rlc_group* group,
                                    const rlc_policy* policy, double* buf,
                                    size_t buflen, int* out_degenerate) {
  RLC_REQUIRE(group);
  RLC_REQUIRE(policy);
  RLC_REQUIRE(buf);
  RLC_REQUIRE(out_degenerate);
  if (buflen < group->impl.records.size()) return fail_arg("buffer too small");
  return guard([&] {
    const auto report = rlclarity::clarity_report(group->impl);
    const auto adv = rlclarity::reweighted_advantage(group->impl, report,
                                                     to_policy(*policy));
    std::copy(adv.values.begin(), adv.values.end(), buf);
    *out_degenerate = adv.degenerate ? 1 : 0;
  });
}

/* ---- judges and clustering ------------------------------------------ */

rlc_status rlc_judge_cache_new(rlc_judge_cache** out) {
  RLC_REQUIRE(out);
  *out = new rlc_judge_cache{std::make_shared<rlclarity::JudgeCache>()};
  return RLC_OK;
}

void rlc_judge_cache_free(rlc_judge_cache* cache) { delete cache; }

rlc_status rlc_judge_cache_size(const rlc_judge_cache* cache, size_t* out) {
  RLC_REQUIRE(cache);
  RLC_REQUIRE(out);
  *out = cache->impl->size();
  return RLC_OK;
}

rlc_status rlc_judge_label_new(rlc_judge** out) {
  RLC_REQUIRE(out);
  *out = new rlc_judge{std::make_unique<rlclarity::LabelEqualityJudge>()};
  return RLC_OK;
}

rlc_status rlc_judge_remote_new(const char* endpoint, rlc_judge_cache* cache,
                                rlc_judge** out) {
  RLC_REQUIRE(endpoint);
  RLC_REQUIRE(out);
  std::shared_ptr<rlclarity::JudgeCache> shared;
  if (cache) shared = cache->impl;
  *out = new rlc_judge{
      std::make_unique<rlclarity::RemoteJudge>(endpoint, std::move(shared))};
  return RLC_OK;
}

rlc_status rlc_judge_callback_new(rlc_judge_fn fn, void* ctx, rlc_judge** out) {
  RLC_REQUIRE(out);
  if (fn == nullptr) return fail_arg("fn must not be NULL");
  auto wrapped = [fn, ctx](const std::string& question, const std::string& a,
                           const std::string& b) {
    const int verdict = fn(ctx, question.c_str(), a.c_str(), b.c_str());
    if (verdict < 0) {
      throw rlclarity::Error(rlclarity::errc::judge_failure,
                             "judge callback reported failure");
    }
    return verdict != 0;
  };
  *out = new rlc_judge{
      std::make_unique<rlclarity::CallbackJudge>(std::move(wrapped))};
  return RLC_OK;
}

void rlc_judge_free(rlc_judge* judge) { delete judge; }

rlc_status rlc_cluster_solutions(const char* question,
                                 const char* const* solutions, size_t n,
                                 rlc_judge* judge, rlc_clusters** out) {
  RLC_REQUIRE(judge);
  RLC_REQUIRE(out);
  if (n > 0) RLC_REQUIRE(solutions);
  return guard([&] {
    std::vector<std::string> items;
    items.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      if (solutions[i] == nullptr) {
        throw rlclarity::Error(rlclarity::errc::invalid_argument,
                               "solutions must not contain NULL");
      }
      items.emplace_back(solutions[i]);
    }
    judge->impl->set_question(question ? question : "");
    *out = new rlc_clusters{rlclarity::cluster_solutions(items, *judge->impl)};
  });
}

void rlc_clusters_free(rlc_clusters* clusters) { delete clusters; }

rlc_status rlc_clusters_count(const rlc_clusters* clusters, size_t* out) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  *out = clusters->impl.clusters.size();
  return RLC_OK;
}

rlc_status rlc_clusters_judge_calls(const rlc_clusters* clusters, size_t* out) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  *out = clusters->impl.judge_calls;
  return RLC_OK;
}

rlc_status rlc_clusters_representative(const rlc_clusters* clusters,
                                       size_t cluster, size_t* out) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  if (cluster >= clusters->impl.clusters.size()) {
    return fail_arg("cluster index out of range");
  }
  *out = clusters->impl.clusters[cluster].representative;
  return RLC_OK;
}

rlc_status rlc_clusters_size(const rlc_clusters* clusters, size_t cluster,
                             size_t* out) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  if (cluster >= clusters->impl.clusters.size()) {
    return fail_arg("cluster index out of range");
  }
  *out = clusters->impl.clusters[cluster].members.size();
  return RLC_OK;
}

rlc_status rlc_clusters_member(const rlc_clusters* clusters, size_t cluster,
                               size_t member, size_t* out) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  if (cluster >= clusters->impl.clusters.size()) {
    return fail_arg("cluster index out of range");
  }
  const auto& members = clusters->impl.clusters[cluster].members;
  if (member >= members.size()) return fail_arg("member index out of range");
  *out = members[member];
  return RLC_OK;
}

rlc_status rlc_distinct_ratio(const rlc_clusters* clusters, size_t n_correct,
                              double* out, int* out_defined) {
  RLC_REQUIRE(clusters);
  RLC_REQUIRE(out);
  RLC_REQUIRE(out_defined);
  return guard([&] {
    const auto ratio = rlclarity::distinct_ratio(clusters->impl, n_correct);
    *out_defined = ratio.has_value() ? 1 : 0;
    *out = ratio.value_or(0.0);
  });
}

/* ---- attribution and stability --------------------------------------- */

rlc_status rlc_severity_of(const char* code, int* out) {
  RLC_REQUIRE(code);
  RLC_REQUIRE(out);
  return guard(
      [&] { *out = static_cast<int>(rlclarity::severity_of(code)); });
}

const char* rlc_severity_name(int severity) {
  if (severity < 0 ||
      severity >= static_cast<int>(rlclarity::kSeverityCount)) {
    return nullptr;
  }
  return rlclarity::severity_name(static_cast<rlclarity::Severity>(severity));
}

rlc_status rlc_attribution_summary(const char* const* codes,
                                   const double* s_values, const int* s_defined,
                                   size_t n, rlc_attribution* out) {
  RLC_REQUIRE(out);
  if (n > 0) RLC_REQUIRE(codes);
  return guard([&] {
    std::vector<rlclarity::AttributionRecord> records;
    records.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      if (codes[i] == nullptr) {
        throw rlclarity::Error(rlclarity::errc::invalid_argument,
                               "codes must not contain NULL");
      }
      rlclarity::AttributionRecord rec;
      rec.error_code = codes[i];
      const bool defined =
          s_values != nullptr && (s_defined == nullptr || s_defined[i] != 0);
      if (defined) rec.s = s_values[i];
      records.push_back(std::move(rec));
    }
    const auto summary = rlclarity::attribution_summary(records);
    *out = rlc_attribution{};
    out->total = summary.total;
    for (size_t sev = 0; sev < rlclarity::kSeverityCount; ++sev) {
      out->counts[sev] = summary.counts[sev];
      out->proportion_defined[sev] = summary.proportions[sev].has_value();
      out->proportions[sev] = summary.proportions[sev].value_or(0.0);
      out->s_neg_defined[sev] = summary.s_neg_fraction[sev].has_value();
      out->s_neg_fraction[sev] = summary.s_neg_fraction[sev].value_or(0.0);
    }
  });
}

rlc_status rlc_stability_by_clarity(const double* ratios, const double* s,
                                    size_t n, rlc_stability* out) {
  RLC_REQUIRE(out);
  if (n > 0) {
    RLC_REQUIRE(ratios);
    RLC_REQUIRE(s);
  }
  return guard([&] {
    std::vector<rlclarity::StabilityEntry> entries;
    entries.reserve(n);
    for (size_t i = 0; i < n; ++i) entries.push_back({ratios[i], s[i]});
    const auto summary = rlclarity::stability_by_clarity(entries);
    *out = rlc_stability{};
    out->n_high = summary.n_high;
    out->mean_ratio_high_defined = summary.mean_ratio_high.has_value();
    out->mean_ratio_high = summary.mean_ratio_high.value_or(0.0);
    out->n_low = summary.n_low;
    out->mean_ratio_low_defined = summary.mean_ratio_low.has_value();
    out->mean_ratio_low = summary.mean_ratio_low.value_or(0.0);
  });
}

/* ---- cross-model intersection ---------------------------------------- */

namespace {

rlc_status intersection_from_maps(const std::map<std::string, double>& a,
                                  const std::map<std::string, double>& b,
                                  rlc_intersection** out) {
  return guard(
      [&] { *out = new rlc_intersection{rlclarity::intersection_stats(a, b)}; });
}

}  // namespace

rlc_status rlc_intersection_new(const char* const* ids_a, const double* rho_a,
                                size_t n_a, const char* const* ids_b,
                                const double* rho_b, size_t n_b,
                                rlc_intersection** out) {
  RLC_REQUIRE(out);
  if (n_a > 0) {
    RLC_REQUIRE(ids_a);
    RLC_REQUIRE(rho_a);
  }
  if (n_b > 0) {
    RLC_REQUIRE(ids_b);
    RLC_REQUIRE(rho_b);
  }
  std::map<std::string, double> a;
  std::map<std::string, double> b;
  for (size_t i = 0; i < n_a; ++i) {
    if (ids_a[i] == nullptr) return fail_arg("ids must not contain NULL");
    a[ids_a[i]] = rho_a[i];
  }
  for (size_t i = 0; i < n_b; ++i) {
    if (ids_b[i] == nullptr) return fail_arg("ids must not contain NULL");
    b[ids_b[i]] = rho_b[i];
  }
  return intersection_from_maps(a, b, out);
}

rlc_status rlc_intersection_open(const char* path_a, const char* path_b,
                                 rlc_intersection** out) {
  RLC_REQUIRE(path_a);
  RLC_REQUIRE(path_b);
  RLC_REQUIRE(out);
  return guard([&] {
    const auto a = rlclarity::read_pass_rate_csv_file(path_a);
    const auto b = rlclarity::read_pass_rate_csv_file(path_b);
    *out = new rlc_intersection{rlclarity::intersection_stats(a, b)};
  });
}

void rlc_intersection_free(rlc_intersection* intersection) {
  delete intersection;
}

rlc_status rlc_intersection_count(const rlc_intersection* intersection,
                                  size_t* out) {
  RLC_REQUIRE(intersection);
  RLC_REQUIRE(out);
  *out = intersection->impl.shared_queries.size();
  return RLC_OK;
}

const char* rlc_intersection_query(const rlc_intersection* intersection,
                                   size_t index) {
  if (intersection == nullptr ||
      index >= intersection->impl.shared_queries.size()) {
    return nullptr;
  }
  return intersection->impl.shared_queries[index].c_str();
}

rlc_status rlc_intersection_pair(const rlc_intersection* intersection,
                                 size_t index, double* out_rho_a,
                                 double* out_rho_b) {
  RLC_REQUIRE(intersection);
  RLC_REQUIRE(out_rho_a);
  RLC_REQUIRE(out_rho_b);
  if (index >= intersection->impl.pairs.size()) {
    return fail_arg("pair index out of range");
  }
  *out_rho_a = intersection->impl.pairs[index].first;
  *out_rho_b = intersection->impl.pairs[index].second;
  return RLC_OK;
}

rlc_status rlc_intersection_fractions(const rlc_intersection* intersection,
                                      double* out_fraction_a,
                                      double* out_fraction_b,
                                      double* out_below_diagonal) {
  RLC_REQUIRE(intersection);
  RLC_REQUIRE(out_fraction_a);
  RLC_REQUIRE(out_fraction_b);
  RLC_REQUIRE(out_below_diagonal);
  *out_fraction_a = intersection->impl.fraction_of_a_solvable;
  *out_fraction_b = intersection->impl.fraction_of_b_solvable;
  *out_below_diagonal = intersection->impl.below_diagonal_fraction;
  return RLC_OK;
}

/* ---- simulator -------------------------------------------------------- */

rlc_status rlc_sim_config_open(const char* path, rlc_sim_config** out) {
  RLC_REQUIRE(path);
  RLC_REQUIRE(out);
  return guard(
      [&] { *out = new rlc_sim_config{rlclarity::parse_sim_config_file(path)}; });
}

rlc_status rlc_sim_config_parse(const char* text, rlc_sim_config** out) {
  RLC_REQUIRE(text);
  RLC_REQUIRE(out);
  return guard([&] {
    std::istringstream in{std::string(text)};
    *out = new rlc_sim_config{rlclarity::parse_sim_config(in)};
  });
}

void rlc_sim_config_free(rlc_sim_config* config) { delete config; }

rlc_status rlc_sim_config_set_seed(rlc_sim_config* config, uint64_t seed) {
  RLC_REQUIRE(config);
  config->impl.seed = seed;
  config->impl.policy.seed = seed;
  return RLC_OK;
}

rlc_status rlc_sim_config_set_steps(rlc_sim_config* config, uint64_t steps) {
  RLC_REQUIRE(config);
  config->impl.steps = static_cast<size_t>(steps);
  return RLC_OK;
}

rlc_status rlc_sim_config_set_policy(rlc_sim_config* config,
                                     const rlc_policy* policy) {
  RLC_REQUIRE(config);
  RLC_REQUIRE(policy);
  return guard([&] {
    config->impl.policy = to_policy(*policy);
    if (!config->impl.policy.seed) config->impl.policy.seed = config->impl.seed;
  });
}

rlc_status rlc_sim_run(const rlc_sim_config* config, rlc_sim_result** out) {
  RLC_REQUIRE(config);
  RLC_REQUIRE(out);
  return guard(
      [&] { *out = new rlc_sim_result{rlclarity::run_training(config->impl)}; });
}

void rlc_sim_result_free(rlc_sim_result* result) { delete result; }

rlc_status rlc_sim_result_steps(const rlc_sim_result* result, size_t* out) {
  RLC_REQUIRE(result);
  RLC_REQUIRE(out);
  *out = result->impl.trajectory.size();
  return RLC_OK;
}

rlc_status rlc_sim_result_row(const rlc_sim_result* result, size_t index,
                              rlc_sim_row* out) {
  RLC_REQUIRE(result);
  RLC_REQUIRE(out);
  if (index >= result->impl.trajectory.size()) {
    return fail_arg("trajectory index out of range");
  }
  const auto& rec = result->impl.trajectory[index];
  *out = rlc_sim_row{};
  out->step = rec.step;
  out->mean_s_defined = rec.mean_s.has_value();
  out->mean_s = rec.mean_s.value_or(0.0);
  out->mean_pass_rate = rec.mean_pass_rate;
  out->mean_w = rec.mean_w;
  out->mean_grad_norm = rec.mean_grad_norm;
  out->grad_var = rec.grad_var;
  return RLC_OK;
}

rlc_status rlc_sim_result_final_pass(const rlc_sim_result* result,
                                     double* out) {
  RLC_REQUIRE(result);
  RLC_REQUIRE(out);
  *out = result->impl.mean_final_expected_pass;
  return RLC_OK;
}

rlc_status rlc_sim_result_write_csv(const rlc_sim_result* result,
                                    const char* path) {
  RLC_REQUIRE(result);
  RLC_REQUIRE(path);
  return guard([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw rlclarity::Error(rlclarity::errc::io_error,
                             std::string("cannot open for writing: ") + path);
    }
    rlclarity::write_trajectory_csv(out, result->impl.trajectory);
  });
}

}  // extern "C"
