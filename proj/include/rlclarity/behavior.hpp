#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rlclarity/types.hpp"

namespace rlclarity {

// Pairwise same-method decision. Implementations must be deterministic for
// a fixed input pair. `set_question` supplies per-query context to judges
// that need it (the remote judge); others ignore it.
class JudgeOracle {
 public:
  virtual ~JudgeOracle() = default;
  virtual bool same_method(const std::string& solution_a,
                           const std::string& solution_b) = 0;
  virtual void set_question(const std::string&) {}
};

// Test double: solutions are method labels, same method iff equal strings.
class LabelEqualityJudge final : public JudgeOracle {
 public:
  bool same_method(const std::string& a, const std::string& b) override {
    return a == b;
  }
};

// Adapts an arbitrary predicate; used by the C bindings.
class CallbackJudge final : public JudgeOracle {
 public:
  using Fn = std::function<bool(const std::string& question,
                                const std::string& a, const std::string& b)>;
  explicit CallbackJudge(Fn fn) : fn_(std::move(fn)) {}
  bool same_method(const std::string& a, const std::string& b) override;
  void set_question(const std::string& q) override { question_ = q; }

 private:
  Fn fn_;
  std::string question_;
};

// Thread-safe verdict cache keyed by an order-independent digest of the
// solution pair. same_method is semantically symmetric, so (a, b) and
// (b, a) share an entry; entries are shared across queries.
class JudgeCache {
 public:
  std::optional<bool> lookup(const std::string& a, const std::string& b) const;
  void store(const std::string& a, const std::string& b, bool verdict);
  std::size_t size() const;

 private:
  static std::pair<std::uint64_t, std::uint64_t> key(const std::string& a,
                                                     const std::string& b);
  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k)
        const noexcept;
  };
  mutable std::mutex mu_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, bool, PairHash>
      map_;
};

// HTTP client judge. Posts {question, solution_a, solution_b} as JSON to
// `endpoint` and reads {"is_same_method": bool, "reason": string} back.
// Network or schema failures raise judge_failure. Not safe for concurrent
// use; give each worker thread its own instance sharing one JudgeCache.
class RemoteJudge final : public JudgeOracle {
 public:
  explicit RemoteJudge(std::string endpoint,
                       std::shared_ptr<JudgeCache> cache = nullptr);
  bool same_method(const std::string& a, const std::string& b) override;
  void set_question(const std::string& q) override { question_ = q; }

 private:
  std::string host_;
  std::string path_;
  std::string question_;
  std::shared_ptr<JudgeCache> cache_;
};

struct Cluster {
  std::size_t representative = 0;
  std::vector<std::size_t> members;
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  std::size_t judge_calls = 0;
  std::size_t total_members() const;
};

// Incremental method clustering: walk solutions in order, compare each to
// the representative (first-assigned member) of every existing cluster in
// creation order, join the first match, else open a new cluster.
ClusterSet cluster_solutions(std::span<const std::string> solutions,
                             JudgeOracle& judge);

// K / n_correct; absent when n_correct is zero. n_correct must equal the
// number of clustered solutions.
std::optional<double> distinct_ratio(const ClusterSet& clusters,
                                     std::size_t n_correct);

struct AttributionRecord {
  std::string error_code;
  std::optional<double> s;
};

struct AttributionSummary {
  // Indexed by Severity.
  std::array<std::size_t, kSeverityCount> counts{};
  std::array<std::optional<double>, kSeverityCount> proportions{};
  // Fraction of records with S < 0 among those with a defined S.
  std::array<std::optional<double>, kSeverityCount> s_neg_fraction{};
  std::size_t total = 0;
};

AttributionSummary attribution_summary(
    std::span<const AttributionRecord> records);

struct StabilityEntry {
  double ratio = 0.0;
  double s = 0.0;
};

struct StabilitySummary {
  std::size_t n_high = 0;  // S >= 0
  std::optional<double> mean_ratio_high;
  std::size_t n_low = 0;  // S < 0
  std::optional<double> mean_ratio_low;
};

// Mean distinct-solution ratio split on S >= 0 versus S < 0.
StabilitySummary stability_by_clarity(std::span<const StabilityEntry> entries);

}  // namespace rlclarity
