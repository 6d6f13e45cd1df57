// rlc: batch front-end for rollout-clarity analysis.
//
// Subcommands wrap the shared library's C interface and write CSV/JSON
// outputs plus a run manifest. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 remote-judge failure.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlclarity.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitJudge = 3;

struct CommandError {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(int exit_code, const std::string& message) {
  throw CommandError{exit_code, message};
}

[[noreturn]] void fail_status(rlc_status status, const std::string& context) {
  const int code = status == RLC_E_JUDGE_FAILURE ? kExitJudge : kExitData;
  fail(code, context + ": " + rlc_last_error());
}

void check(rlc_status status, const std::string& context) {
  if (status != RLC_OK) fail_status(status, context);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitData, "cannot read input: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(buf.str())));
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(kExitData, "cannot open for writing: " + path);
  out << contents;
  if (!out) fail(kExitData, "write failed: " + path);
}

// Manifest recording what produced which outputs; rerunning the same
// command on the same inputs rewrites every output byte-identically
// (the timestamp below is the one field that moves).
void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& inputs,
                    const nlohmann::json& config,
                    const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["tool_version"] = rlc_version();
  manifest["timestamp"] = utc_timestamp();
  manifest["inputs"] = inputs;
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  write_file(path, manifest.dump(2) + "\n");
}

struct PolicyFlags {
  std::string name = "none";
  std::optional<double> beta;
  std::optional<double> clamp_lo;
  std::optional<double> clamp_hi;
  std::optional<std::uint64_t> seed;

  rlc_policy resolve() const {
    int kind = 0;
    if (rlc_policy_kind_from_name(name.c_str(), &kind) != RLC_OK) {
      fail(kExitUsage, "unknown policy: " + name);
    }
    rlc_policy policy{};
    check(rlc_policy_default(kind, &policy), "policy defaults");
    if (beta) policy.beta = *beta;
    if (clamp_lo.has_value() != clamp_hi.has_value()) {
      fail(kExitUsage, "--clamp-lo and --clamp-hi must be given together");
    }
    if (clamp_lo) {
      if (*clamp_lo > *clamp_hi) fail(kExitUsage, "--clamp-lo exceeds --clamp-hi");
      policy.has_clamp = 1;
      policy.clamp_lo = *clamp_lo;
      policy.clamp_hi = *clamp_hi;
    }
    if (seed) {
      policy.has_seed = 1;
      policy.seed = *seed;
    }
    return policy;
  }

  nlohmann::json describe(const rlc_policy& policy) const {
    nlohmann::json out;
    out["kind"] = rlc_policy_kind_name(policy.kind);
    out["beta"] = policy.beta;
    if (policy.has_clamp) {
      out["clamp"] = {policy.clamp_lo, policy.clamp_hi};
    }
    if (policy.has_seed) out["seed"] = policy.seed;
    return out;
  }
};

class DatasetHandle {
 public:
  explicit DatasetHandle(const std::string& path) {
    check(rlc_dataset_open(path.c_str(), &ds_), "reading " + path);
  }
  ~DatasetHandle() { rlc_dataset_free(ds_); }
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;

  std::size_t group_count() const {
    std::size_t n = 0;
    check(rlc_dataset_group_count(ds_, &n), "group count");
    return n;
  }

  const rlc_group* group(std::size_t index) const {
    const rlc_group* g = nullptr;
    check(rlc_dataset_group(ds_, index, &g), "group access");
    return g;
  }

  const rlc_dataset* raw() const { return ds_; }

 private:
  rlc_dataset* ds_ = nullptr;
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
// CommandError wins and is rethrown on the caller's thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<CommandError> error;
  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (const CommandError& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = e;
        stop.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_workers =
      std::min<std::size_t>(threads, n) > 0
          ? static_cast<unsigned>(std::min<std::size_t>(threads, n))
          : 1u;
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) throw *error;
}

struct GroupClarity {
  std::string query_id;
  std::size_t size = 0;
  rlc_clarity clarity{};
};

GroupClarity clarity_of(const rlc_group* group) {
  GroupClarity out;
  out.query_id = rlc_group_query_id(group);
  check(rlc_group_size(group, &out.size), "group size");
  check(rlc_clarity_report(group, &out.clarity), "clarity of " + out.query_id);
  return out;
}

std::string opt_cell(int defined, double value) {
  return defined ? fmt(value) : std::string();
}

/* ---- score ----------------------------------------------------------- */

struct ScoreOptions {
  std::string input;
  std::string output;
  std::string summary;
};

int cmd_score(const ScoreOptions& opt) {
  const std::string summary_path =
      opt.summary.empty() ? opt.output + ".summary.csv" : opt.summary;
  const auto digest = file_digest(opt.input);
  DatasetHandle ds(opt.input);

  std::ostringstream scores;
  std::ostringstream summary;
  scores << "query_id,response_id,score\n";
  summary << "query_id,n,pass_rate,p_pos_mean,p_neg_mean\n";
  std::vector<double> buf;
  for (std::size_t g = 0; g < ds.group_count(); ++g) {
    const rlc_group* group = ds.group(g);
    const std::string query_id = rlc_group_query_id(group);
    std::size_t n = 0;
    check(rlc_group_size(group, &n), "group size");
    buf.resize(n);
    check(rlc_group_scores(group, buf.data(), buf.size()),
          "scores of " + query_id);
    for (std::size_t i = 0; i < n; ++i) {
      scores << csv_quote(query_id) << ','
             << csv_quote(rlc_group_response_id(group, i)) << ','
             << fmt(buf[i]) << '\n';
    }
    rlc_clarity clarity{};
    check(rlc_clarity_report(group, &clarity), "summary of " + query_id);
    summary << csv_quote(query_id) << ',' << n << ','
            << fmt(clarity.pass_rate) << ','
            << opt_cell(clarity.p_pos_defined, clarity.p_pos_mean) << ','
            << opt_cell(clarity.p_neg_defined, clarity.p_neg_mean) << '\n';
  }
  write_file(opt.output, scores.str());
  write_file(summary_path, summary.str());
  write_manifest(opt.output + ".manifest.json", "score",
                 {{opt.input, digest}}, nlohmann::json::object(),
                 {opt.output, summary_path});
  return 0;
}

/* ---- clarity ---------------------------------------------------------- */

struct ClarityOptions {
  std::string input;
  std::string output;
  std::string density;
  std::string bins;
  unsigned threads = 1;
};

int cmd_clarity(const ClarityOptions& opt) {
  const auto digest = file_digest(opt.input);
  DatasetHandle ds(opt.input);
  const std::size_t n = ds.group_count();

  std::vector<std::string> rows(n);
  std::vector<std::string> density_rows(n);
  parallel_for(n, opt.threads, [&](std::size_t g) {
    const rlc_group* group = ds.group(g);
    const GroupClarity gc = clarity_of(group);
    nlohmann::json row;
    row["query_id"] = gc.query_id;
    row["n"] = gc.size;
    row["pass_rate"] = gc.clarity.pass_rate;
    if (gc.clarity.s_defined) row["S"] = gc.clarity.s;
    if (gc.clarity.s_rect_defined) row["S_rect"] = gc.clarity.s_rect;
    if (gc.clarity.fisher_defined) row["F"] = gc.clarity.fisher;
    if (gc.clarity.fisher_rect_defined) row["F_rect"] = gc.clarity.fisher_rect;
    if (gc.clarity.p_pos_defined) row["p_pos_mean"] = gc.clarity.p_pos_mean;
    if (gc.clarity.p_neg_defined) row["p_neg_mean"] = gc.clarity.p_neg_mean;
    rows[g] = row.dump() + "\n";

    if (!opt.density.empty()) {
      std::vector<double> scores(gc.size);
      check(rlc_group_scores(group, scores.data(), scores.size()),
            "scores of " + gc.query_id);
      std::ostringstream out;
      for (std::size_t i = 0; i < gc.size; ++i) {
        int correct = 0;
        check(rlc_group_correct(group, i, &correct), "verdict");
        out << csv_quote(gc.query_id) << ','
            << csv_quote(rlc_group_response_id(group, i)) << ','
            << fmt(scores[i]) << ',' << correct << '\n';
      }
      density_rows[g] = out.str();
    }
  });

  std::string jsonl;
  for (const auto& row : rows) jsonl += row;
  write_file(opt.output, jsonl);
  std::vector<std::string> outputs{opt.output};

  if (!opt.density.empty()) {
    std::string csv = "query_id,response_id,score,correct\n";
    for (const auto& row : density_rows) csv += row;
    write_file(opt.density, csv);
    outputs.push_back(opt.density);
  }
  if (!opt.bins.empty()) {
    rlc_bins bins{};
    check(rlc_dataset_bins(ds.raw(), &bins), "bins");
    nlohmann::json summary;
    summary["s_positive"] = {{"n", bins.n_high}};
    if (bins.mean_rho_high_defined) {
      summary["s_positive"]["mean_pass_rate"] = bins.mean_rho_high;
    }
    summary["s_negative"] = {{"n", bins.n_low}};
    if (bins.mean_rho_low_defined) {
      summary["s_negative"]["mean_pass_rate"] = bins.mean_rho_low;
    }
    summary["s_zero"] = {{"n", bins.n_zero}};
    if (bins.mean_rho_zero_defined) {
      summary["s_zero"]["mean_pass_rate"] = bins.mean_rho_zero;
    }
    summary["undefined"] = {{"n", bins.n_undefined}};
    write_file(opt.bins, summary.dump(2) + "\n");
    outputs.push_back(opt.bins);
  }

  write_manifest(opt.output + ".manifest.json", "clarity",
                 {{opt.input, digest}},
                 nlohmann::json{{"threads", opt.threads}}, outputs);
  return 0;
}

/* ---- reweight --------------------------------------------------------- */

struct ReweightOptions {
  std::string input;
  std::string output;
  PolicyFlags policy;
  unsigned threads = 1;
};

int cmd_reweight(const ReweightOptions& opt) {
  const auto digest = file_digest(opt.input);
  const rlc_policy policy = opt.policy.resolve();
  if (policy.kind == RLC_POLICY_RANDOM && !policy.has_seed) {
    fail(kExitUsage, "--policy random requires --seed");
  }
  DatasetHandle ds(opt.input);
  const std::size_t n = ds.group_count();

  std::vector<std::string> rows(n);
  parallel_for(n, opt.threads, [&](std::size_t g) {
    const rlc_group* group = ds.group(g);
    const std::string query_id = rlc_group_query_id(group);
    std::size_t size = 0;
    check(rlc_group_size(group, &size), "group size");

    double w = 0.0;
    check(rlc_weight(group, &policy, &w), "weight of " + query_id);
    std::vector<double> adv(size);
    int degenerate = 0;
    check(rlc_reweighted_advantage(group, &policy, adv.data(), adv.size(),
                                   &degenerate),
          "advantages of " + query_id);

    nlohmann::json row;
    row["query_id"] = query_id;
    row["w"] = w;
    row["advantages"] = adv;
    row["degenerate"] = degenerate != 0;
    rows[g] = row.dump() + "\n";
  });

  std::string jsonl;
  for (const auto& row : rows) jsonl += row;
  write_file(opt.output, jsonl);

  nlohmann::json config;
  config["policy"] = opt.policy.describe(policy);
  config["threads"] = opt.threads;
  write_manifest(opt.output + ".manifest.json", "reweight",
                 {{opt.input, digest}}, config, {opt.output});
  return 0;
}

/* ---- cluster ---------------------------------------------------------- */

struct ClusterOptions {
  std::string input;
  std::string output;
  std::string assignments;
  std::string judge = "label";
  std::string endpoint;
  unsigned max_inflight = 4;
  unsigned threads = 1;
};

struct QueryClustering {
  std::string summary_row;
  std::string assignment_rows;
};

int cmd_cluster(const ClusterOptions& opt) {
  if (opt.judge != "label" && opt.judge != "remote") {
    fail(kExitUsage, "--judge must be label or remote");
  }
  if (opt.judge == "remote" && opt.endpoint.empty()) {
    fail(kExitUsage, "--judge remote requires --endpoint");
  }
  const auto digest = file_digest(opt.input);
  DatasetHandle ds(opt.input);
  const std::size_t n = ds.group_count();

  rlc_judge_cache* cache = nullptr;
  check(rlc_judge_cache_new(&cache), "judge cache");

  const unsigned workers =
      opt.judge == "remote" ? std::min(std::max(opt.max_inflight, 1u),
                                       std::max(opt.threads, 1u))
                            : opt.threads;

  std::vector<QueryClustering> results(n);
  auto run_group = [&](std::size_t g) {
    const rlc_group* group = ds.group(g);
    const std::string query_id = rlc_group_query_id(group);
    std::size_t size = 0;
    check(rlc_group_size(group, &size), "group size");

    // Cluster the correct responses only; the distinct-solution ratio is
    // defined over them.
    std::vector<std::size_t> correct_records;
    std::vector<const char*> solutions;
    for (std::size_t i = 0; i < size; ++i) {
      int correct = 0;
      check(rlc_group_correct(group, i, &correct), "verdict");
      if (!correct) continue;
      const char* item = opt.judge == "label"
                             ? rlc_group_method_label(group, i)
                             : rlc_group_text(group, i);
      if (item == nullptr) {
        fail(kExitData,
             "query " + query_id + " response " +
                 rlc_group_response_id(group, i) +
                 (opt.judge == "label" ? " lacks method_label"
                                       : " lacks text"));
      }
      correct_records.push_back(i);
      solutions.push_back(item);
    }

    rlc_judge* judge = nullptr;
    if (opt.judge == "label") {
      check(rlc_judge_label_new(&judge), "label judge");
    } else {
      check(rlc_judge_remote_new(opt.endpoint.c_str(), cache, &judge),
            "remote judge");
    }
    rlc_clusters* clusters = nullptr;
    const rlc_status st = rlc_cluster_solutions(
        query_id.c_str(), solutions.data(), solutions.size(), judge, &clusters);
    rlc_judge_free(judge);
    if (st != RLC_OK) fail_status(st, "clustering " + query_id);

    std::size_t n_clusters = 0;
    std::size_t judge_calls = 0;
    check(rlc_clusters_count(clusters, &n_clusters), "cluster count");
    check(rlc_clusters_judge_calls(clusters, &judge_calls), "judge calls");
    double ratio = 0.0;
    int ratio_defined = 0;
    check(rlc_distinct_ratio(clusters, solutions.size(), &ratio,
                             &ratio_defined),
          "distinct ratio of " + query_id);

    std::ostringstream assignments;
    for (std::size_t c = 0; c < n_clusters; ++c) {
      std::size_t members = 0;
      check(rlc_clusters_size(clusters, c, &members), "cluster size");
      for (std::size_t m = 0; m < members; ++m) {
        std::size_t member = 0;
        check(rlc_clusters_member(clusters, c, m, &member), "cluster member");
        assignments << csv_quote(query_id) << ','
                    << csv_quote(rlc_group_response_id(
                           group, correct_records[member]))
                    << ',' << c << '\n';
      }
    }
    rlc_clusters_free(clusters);

    std::ostringstream summary;
    summary << csv_quote(query_id) << ',' << solutions.size() << ','
            << n_clusters << ','
            << (ratio_defined ? fmt(ratio) : std::string()) << ','
            << judge_calls << '\n';
    results[g] = {summary.str(), assignments.str()};
  };

  try {
    parallel_for(n, workers, run_group);
  } catch (...) {
    rlc_judge_cache_free(cache);
    throw;
  }
  std::size_t cache_entries = 0;
  check(rlc_judge_cache_size(cache, &cache_entries), "cache size");
  rlc_judge_cache_free(cache);

  std::string summary_csv =
      "query_id,n_correct,n_clusters,distinct_ratio,judge_calls\n";
  std::string assignment_csv = "query_id,response_id,cluster\n";
  for (const auto& r : results) {
    summary_csv += r.summary_row;
    assignment_csv += r.assignment_rows;
  }
  write_file(opt.output, summary_csv);
  std::vector<std::string> outputs{opt.output};
  if (!opt.assignments.empty()) {
    write_file(opt.assignments, assignment_csv);
    outputs.push_back(opt.assignments);
  }

  nlohmann::json config;
  config["judge"] = opt.judge;
  if (!opt.endpoint.empty()) config["endpoint"] = opt.endpoint;
  config["max_inflight"] = opt.max_inflight;
  config["threads"] = opt.threads;
  config["cache_entries"] = cache_entries;
  write_manifest(opt.output + ".manifest.json", "cluster",
                 {{opt.input, digest}}, config, outputs);
  return 0;
}

/* ---- attribute -------------------------------------------------------- */

struct AttributeOptions {
  std::string input;
  std::string output;
};

struct AttributionInputs {
  std::vector<std::string> codes;
  std::vector<double> s_query;
  std::vector<int> s_query_defined;
  std::vector<double> s_response;
  std::vector<int> s_response_defined;
};

AttributionInputs collect_attribution(const DatasetHandle& ds) {
  AttributionInputs out;
  std::vector<double> samples;
  for (std::size_t g = 0; g < ds.group_count(); ++g) {
    const rlc_group* group = ds.group(g);
    std::size_t size = 0;
    check(rlc_group_size(group, &size), "group size");

    bool any_code = false;
    for (std::size_t i = 0; i < size && !any_code; ++i) {
      any_code = rlc_group_error_code(group, i) != nullptr;
    }
    if (!any_code) continue;

    rlc_clarity clarity{};
    check(rlc_clarity_report(group, &clarity), "clarity");
    samples.resize(size);
    std::size_t n_samples = 0;
    int samples_defined = 0;
    check(rlc_silhouette_samples(group, samples.data(), samples.size(),
                                 &n_samples, &samples_defined),
          "silhouette samples");

    for (std::size_t i = 0; i < size; ++i) {
      const char* code = rlc_group_error_code(group, i);
      if (code == nullptr) continue;
      out.codes.emplace_back(code);
      out.s_query.push_back(clarity.s_defined ? clarity.s : 0.0);
      out.s_query_defined.push_back(clarity.s_defined);
      out.s_response.push_back(samples_defined ? samples[i] : 0.0);
      out.s_response_defined.push_back(samples_defined);
    }
  }
  return out;
}

std::string attribution_csv(const AttributionInputs& in) {
  std::vector<const char*> codes;
  codes.reserve(in.codes.size());
  for (const auto& c : in.codes) codes.push_back(c.c_str());

  rlc_attribution by_query{};
  rlc_attribution by_response{};
  check(rlc_attribution_summary(codes.data(), in.s_query.data(),
                                in.s_query_defined.data(), codes.size(),
                                &by_query),
        "attribution (query-level S)");
  check(rlc_attribution_summary(codes.data(), in.s_response.data(),
                                in.s_response_defined.data(), codes.size(),
                                &by_response),
        "attribution (per-response s)");

  std::string csv =
      "severity,count,proportion,s_neg_fraction_query,s_neg_fraction_response\n";
  for (int sev = 0; sev < 4; ++sev) {
    csv += rlc_severity_name(sev);
    csv += ',' + std::to_string(by_query.counts[sev]) + ',';
    csv += opt_cell(by_query.proportion_defined[sev], by_query.proportions[sev]);
    csv += ',';
    csv += opt_cell(by_query.s_neg_defined[sev], by_query.s_neg_fraction[sev]);
    csv += ',';
    csv += opt_cell(by_response.s_neg_defined[sev],
                    by_response.s_neg_fraction[sev]);
    csv += '\n';
  }
  return csv;
}

int cmd_attribute(const AttributeOptions& opt) {
  const auto digest = file_digest(opt.input);
  DatasetHandle ds(opt.input);
  write_file(opt.output, attribution_csv(collect_attribution(ds)));
  write_manifest(opt.output + ".manifest.json", "attribute",
                 {{opt.input, digest}}, nlohmann::json::object(),
                 {opt.output});
  return 0;
}

/* ---- simulate --------------------------------------------------------- */

struct SimulateOptions {
  std::string config;
  std::string output;
  PolicyFlags policy;
  bool policy_given = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
};

int cmd_simulate(const SimulateOptions& opt) {
  const auto digest = file_digest(opt.config);
  rlc_sim_config* config = nullptr;
  check(rlc_sim_config_open(opt.config.c_str(), &config),
        "reading " + opt.config);
  if (opt.seed) check(rlc_sim_config_set_seed(config, *opt.seed), "seed");
  if (opt.steps) check(rlc_sim_config_set_steps(config, *opt.steps), "steps");
  rlc_policy policy{};
  if (opt.policy_given) {
    policy = opt.policy.resolve();
    check(rlc_sim_config_set_policy(config, &policy), "policy");
  }

  rlc_sim_result* result = nullptr;
  const rlc_status st = rlc_sim_run(config, &result);
  if (st != RLC_OK) {
    rlc_sim_config_free(config);
    fail_status(st, "simulation");
  }
  const rlc_status wst = rlc_sim_result_write_csv(result, opt.output.c_str());
  double final_pass = 0.0;
  check(rlc_sim_result_final_pass(result, &final_pass), "final pass");
  rlc_sim_result_free(result);
  rlc_sim_config_free(config);
  if (wst != RLC_OK) fail_status(wst, "writing " + opt.output);

  nlohmann::json config_json;
  if (opt.seed) config_json["seed"] = *opt.seed;
  if (opt.steps) config_json["steps"] = *opt.steps;
  if (opt.policy_given) config_json["policy"] = opt.policy.describe(policy);
  config_json["final_expected_pass"] = final_pass;
  write_manifest(opt.output + ".manifest.json", "simulate",
                 {{opt.config, digest}}, config_json, {opt.output});
  return 0;
}

/* ---- report ----------------------------------------------------------- */

struct ReportOptions {
  std::string input;
  std::string out_dir;
  std::string pass_a;
  std::string pass_b;
  unsigned threads = 1;
};

struct ReportRow {
  GroupClarity gc;
  std::optional<double> distinct_ratio;
  std::optional<std::string> difficulty;
};

int cmd_report(const ReportOptions& opt) {
  if (opt.pass_a.empty() != opt.pass_b.empty()) {
    fail(kExitUsage, "--pass-a and --pass-b must be given together");
  }
  std::map<std::string, std::string> inputs{{opt.input, file_digest(opt.input)}};
  DatasetHandle ds(opt.input);
  const std::size_t n = ds.group_count();

  std::vector<ReportRow> rows(n);
  parallel_for(n, opt.threads, [&](std::size_t g) {
    const rlc_group* group = ds.group(g);
    ReportRow row;
    row.gc = clarity_of(group);

    // Distinct-solution ratio over correct responses, method labels only;
    // skipped when any correct response lacks a label.
    std::vector<const char*> labels;
    bool labels_ok = true;
    for (std::size_t i = 0; i < row.gc.size; ++i) {
      int correct = 0;
      check(rlc_group_correct(group, i, &correct), "verdict");
      if (!correct) continue;
      const char* label = rlc_group_method_label(group, i);
      if (label == nullptr) {
        labels_ok = false;
        break;
      }
      labels.push_back(label);
    }
    if (labels_ok && !labels.empty()) {
      rlc_judge* judge = nullptr;
      check(rlc_judge_label_new(&judge), "label judge");
      rlc_clusters* clusters = nullptr;
      const rlc_status st =
          rlc_cluster_solutions(row.gc.query_id.c_str(), labels.data(),
                                labels.size(), judge, &clusters);
      rlc_judge_free(judge);
      if (st != RLC_OK) fail_status(st, "clustering " + row.gc.query_id);
      double ratio = 0.0;
      int defined = 0;
      check(rlc_distinct_ratio(clusters, labels.size(), &ratio, &defined),
            "distinct ratio");
      rlc_clusters_free(clusters);
      if (defined) row.distinct_ratio = ratio;
    }

    for (std::size_t i = 0; i < row.gc.size; ++i) {
      const char* difficulty = rlc_group_difficulty(group, i);
      if (difficulty != nullptr) {
        row.difficulty = difficulty;
        break;
      }
    }
    rows[g] = std::move(row);
  });

  // Scatter table: per-query clarity against pass rate.
  std::string scatter =
      "query_id,pass_rate,S,S_rect,F,F_rect,distinct_ratio\n";
  for (const auto& row : rows) {
    scatter += csv_quote(row.gc.query_id) + ',' + fmt(row.gc.clarity.pass_rate);
    scatter += ',' + opt_cell(row.gc.clarity.s_defined, row.gc.clarity.s);
    scatter +=
        ',' + opt_cell(row.gc.clarity.s_rect_defined, row.gc.clarity.s_rect);
    scatter +=
        ',' + opt_cell(row.gc.clarity.fisher_defined, row.gc.clarity.fisher);
    scatter += ',' + opt_cell(row.gc.clarity.fisher_rect_defined,
                              row.gc.clarity.fisher_rect);
    scatter += ',';
    if (row.distinct_ratio) scatter += fmt(*row.distinct_ratio);
    scatter += '\n';
  }

  // Clarity bin summary.
  rlc_bins bins{};
  check(rlc_dataset_bins(ds.raw(), &bins), "bins");
  std::string bins_csv = "bin,n,mean_pass_rate\n";
  bins_csv += "s_positive," + std::to_string(bins.n_high) + ',' +
              opt_cell(bins.mean_rho_high_defined, bins.mean_rho_high) + '\n';
  bins_csv += "s_negative," + std::to_string(bins.n_low) + ',' +
              opt_cell(bins.mean_rho_low_defined, bins.mean_rho_low) + '\n';
  bins_csv += "s_zero," + std::to_string(bins.n_zero) + ',' +
              opt_cell(bins.mean_rho_zero_defined, bins.mean_rho_zero) + '\n';
  bins_csv += "undefined," + std::to_string(bins.n_undefined) + ",\n";

  // Error-severity attribution table.
  const std::string attribution = attribution_csv(collect_attribution(ds));

  // Stability split by clarity bucket.
  std::vector<double> ratios;
  std::vector<double> s_values;
  for (const auto& row : rows) {
    if (row.distinct_ratio && row.gc.clarity.s_defined) {
      ratios.push_back(*row.distinct_ratio);
      s_values.push_back(row.gc.clarity.s);
    }
  }
  rlc_stability stability{};
  check(rlc_stability_by_clarity(ratios.data(), s_values.data(), ratios.size(),
                                 &stability),
        "stability");
  std::string stability_csv = "bucket,n,mean_distinct_ratio\n";
  stability_csv +=
      "s_ge_0," + std::to_string(stability.n_high) + ',' +
      opt_cell(stability.mean_ratio_high_defined, stability.mean_ratio_high) +
      '\n';
  stability_csv +=
      "s_lt_0," + std::to_string(stability.n_low) + ',' +
      opt_cell(stability.mean_ratio_low_defined, stability.mean_ratio_low) +
      '\n';

  // Distinct ratio grouped by the optional difficulty column.
  std::map<std::string, std::pair<std::size_t, double>> by_difficulty;
  for (const auto& row : rows) {
    if (row.difficulty && row.distinct_ratio) {
      auto& [count, sum] = by_difficulty[*row.difficulty];
      ++count;
      sum += *row.distinct_ratio;
    }
  }
  std::string difficulty_csv;
  if (!by_difficulty.empty()) {
    difficulty_csv = "difficulty,n,mean_distinct_ratio\n";
    for (const auto& [difficulty, acc] : by_difficulty) {
      difficulty_csv += csv_quote(difficulty) + ',' +
                        std::to_string(acc.first) + ',' +
                        fmt(acc.second / static_cast<double>(acc.first)) + '\n';
    }
  }

  const std::string dir = opt.out_dir.empty() ? "." : opt.out_dir;
  std::error_code dir_ec;
  std::filesystem::create_directories(dir, dir_ec);
  auto out_path = [&](const std::string& name) { return dir + "/" + name; };
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const std::string path = out_path(name);
    write_file(path, contents);
    outputs.push_back(path);
  };
  emit("scatter.csv", scatter);
  emit("bins.csv", bins_csv);
  emit("attribution.csv", attribution);
  emit("stability.csv", stability_csv);
  if (!difficulty_csv.empty()) emit("difficulty.csv", difficulty_csv);

  if (!opt.pass_a.empty()) {
    inputs[opt.pass_a] = file_digest(opt.pass_a);
    inputs[opt.pass_b] = file_digest(opt.pass_b);
    rlc_intersection* intersection = nullptr;
    check(rlc_intersection_open(opt.pass_a.c_str(), opt.pass_b.c_str(),
                                &intersection),
          "intersection");
    std::size_t shared = 0;
    check(rlc_intersection_count(intersection, &shared), "intersection count");
    double frac_a = 0.0;
    double frac_b = 0.0;
    double below = 0.0;
    check(rlc_intersection_fractions(intersection, &frac_a, &frac_b, &below),
          "intersection fractions");
    std::string pairs_csv = "query_id,rho_a,rho_b\n";
    for (std::size_t i = 0; i < shared; ++i) {
      double rho_a = 0.0;
      double rho_b = 0.0;
      check(rlc_intersection_pair(intersection, i, &rho_a, &rho_b),
            "intersection pair");
      pairs_csv +=
          csv_quote(rlc_intersection_query(intersection, i)) + ',' +
          fmt(rho_a) + ',' + fmt(rho_b) + '\n';
    }
    rlc_intersection_free(intersection);
    nlohmann::json joint;
    joint["shared_queries"] = shared;
    joint["fraction_of_a_solvable"] = frac_a;
    joint["fraction_of_b_solvable"] = frac_b;
    joint["below_diagonal_fraction"] = below;
    emit("intersection.csv", pairs_csv);
    emit("intersection.json", joint.dump(2) + "\n");
  }

  write_manifest(out_path("manifest.json"), "report", inputs,
                 nlohmann::json{{"threads", opt.threads}}, outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rollout clarity analytics"};
  app.require_subcommand(1);
  int rc = 0;

  ScoreOptions score;
  auto* score_cmd =
      app.add_subcommand("score", "Length-normalized sequence scores");
  score_cmd->add_option("--input", score.input, "rollout JSONL")->required();
  score_cmd->add_option("--output", score.output, "per-record score CSV")
      ->required();
  score_cmd->add_option("--summary", score.summary,
                        "per-query summary CSV (default <output>.summary.csv)");
  score_cmd->callback([&] { rc = cmd_score(score); });

  ClarityOptions clarity;
  auto* clarity_cmd =
      app.add_subcommand("clarity", "Silhouette and Fisher clarity per query");
  clarity_cmd->add_option("--input", clarity.input, "rollout JSONL")
      ->required();
  clarity_cmd->add_option("--output", clarity.output,
                          "per-query clarity reports, JSONL")
      ->required();
  clarity_cmd->add_option("--density", clarity.density,
                          "per-record (score, verdict) CSV");
  clarity_cmd->add_option("--bins", clarity.bins, "bin summary JSON");
  clarity_cmd->add_option("--threads", clarity.threads, "worker threads");
  clarity_cmd->callback([&] { rc = cmd_clarity(clarity); });

  ReweightOptions reweight;
  auto* reweight_cmd =
      app.add_subcommand("reweight", "Clarity-aware reweighted advantages");
  reweight_cmd->add_option("--input", reweight.input, "rollout JSONL")
      ->required();
  reweight_cmd->add_option("--output", reweight.output,
                           "per-query (w, advantages) JSONL")
      ->required();
  reweight_cmd->add_option("--policy", reweight.policy.name,
                           "silhouette|fisher|separation|passrate|random|none");
  reweight_cmd->add_option("--beta", reweight.policy.beta,
                           "weight sensitivity");
  reweight_cmd->add_option("--clamp-lo", reweight.policy.clamp_lo,
                           "weight clamp lower bound");
  reweight_cmd->add_option("--clamp-hi", reweight.policy.clamp_hi,
                           "weight clamp upper bound");
  reweight_cmd->add_option("--seed", reweight.policy.seed,
                           "seed for the random policy");
  reweight_cmd->add_option("--threads", reweight.threads, "worker threads");
  reweight_cmd->callback([&] { rc = cmd_reweight(reweight); });

  ClusterOptions cluster;
  auto* cluster_cmd =
      app.add_subcommand("cluster", "Incremental solution-method clustering");
  cluster_cmd->add_option("--input", cluster.input, "rollout JSONL")
      ->required();
  cluster_cmd->add_option("--output", cluster.output, "per-query summary CSV")
      ->required();
  cluster_cmd->add_option("--assignments", cluster.assignments,
                          "per-response cluster CSV");
  cluster_cmd->add_option("--judge", cluster.judge, "label|remote");
  cluster_cmd->add_option("--endpoint", cluster.endpoint,
                          "remote judge URL");
  cluster_cmd->add_option("--max-inflight", cluster.max_inflight,
                          "concurrent remote requests");
  cluster_cmd->add_option("--threads", cluster.threads, "worker threads");
  cluster_cmd->callback([&] { rc = cmd_cluster(cluster); });

  AttributeOptions attribute;
  auto* attribute_cmd =
      app.add_subcommand("attribute", "Error-severity attribution");
  attribute_cmd->add_option("--input", attribute.input, "rollout JSONL")
      ->required();
  attribute_cmd->add_option("--output", attribute.output, "attribution CSV")
      ->required();
  attribute_cmd->callback([&] { rc = cmd_attribute(attribute); });

  SimulateOptions simulate;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Toy-policy training simulation");
  simulate_cmd->add_option("--config", simulate.config, "key=value config")
      ->required();
  simulate_cmd->add_option("--output", simulate.output, "trajectory CSV")
      ->required();
  auto* policy_opt = simulate_cmd->add_option(
      "--policy", simulate.policy.name,
      "override config policy (silhouette|fisher|separation|passrate|random|none)");
  simulate_cmd->add_option("--beta", simulate.policy.beta, "override beta");
  simulate_cmd->add_option("--seed", simulate.seed, "override seed");
  simulate_cmd->add_option("--steps", simulate.steps, "override steps");
  simulate_cmd->callback([&] {
    simulate.policy_given = policy_opt->count() > 0;
    rc = cmd_simulate(simulate);
  });

  ReportOptions report;
  auto* report_cmd = app.add_subcommand(
      "report", "Scatter, bins, attribution and stability tables");
  report_cmd->add_option("--input", report.input, "rollout JSONL")->required();
  report_cmd->add_option("--out-dir", report.out_dir, "output directory")
      ->required();
  report_cmd->add_option("--pass-a", report.pass_a,
                         "pass-rate CSV for model A");
  report_cmd->add_option("--pass-b", report.pass_b,
                         "pass-rate CSV for model B");
  report_cmd->add_option("--threads", report.threads, "worker threads");
  report_cmd->callback([&] { rc = cmd_report(report); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "rlc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CommandError& e) {
    std::cerr << "rlc: " << e.message << "\n";
    return e.exit_code;
  }
  return rc;
}
